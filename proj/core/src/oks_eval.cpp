#include "kpbench/oks_eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "kpbench/error.hpp"
#include "kpbench/parallel.hpp"

namespace kpbench {
namespace {

constexpr int kRecallPoints = 101;

// Similarity between a detection and a gt; for instances without labeled
// keypoints (ignore regions only) it is 1 when the detection's keypoint
// centroid falls inside the gt box and 0 otherwise.
double similarity(const Annotation& gt, const Prediction& det, std::span<const double> sigmas) {
  if (gt.num_keypoints > 0) return compute_oks(gt, det.keypoints, sigmas);
  const std::size_t k = det.keypoints.size() / 3;
  if (k == 0) return 0.0;
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    cx += det.keypoints[3 * i];
    cy += det.keypoints[3 * i + 1];
  }
  cx /= static_cast<double>(k);
  cy /= static_cast<double>(k);
  const auto& b = gt.bbox;
  const bool inside = cx >= b[0] && cx <= b[0] + b[2] && cy >= b[1] && cy <= b[1] + b[3];
  return inside ? 1.0 : 0.0;
}

std::vector<std::size_t> score_order(std::span<const Prediction> dets, int max_detections) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Ties are broken by the keypoint values, never by input position.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    return std::lexicographical_compare(dets[a].keypoints.begin(), dets[a].keypoints.end(),
                                        dets[b].keypoints.begin(), dets[b].keypoints.end());
  });
  if (order.size() > static_cast<std::size_t>(max_detections)) {
    order.resize(static_cast<std::size_t>(max_detections));
  }
  return order;
}

struct ImageContext {
  std::span<const Annotation> gts;
  std::span<const Prediction> dets;
  std::vector<std::size_t> order;               // truncated score order
  std::vector<std::vector<double>> sim;         // [order position][gt]
  std::vector<double> det_area;                 // per order position
};

ImageContext make_context(std::span<const Annotation> gts, std::span<const Prediction> dets,
                          const EvalParams& params, std::span<const double> sigmas) {
  ImageContext ctx{gts, dets, score_order(dets, params.max_detections), {}, {}};
  ctx.sim.resize(ctx.order.size());
  ctx.det_area.resize(ctx.order.size());
  for (std::size_t p = 0; p < ctx.order.size(); ++p) {
    const auto& det = dets[ctx.order[p]];
    ctx.det_area[p] = detection_area(det);
    ctx.sim[p].resize(gts.size());
    for (std::size_t g = 0; g < gts.size(); ++g) {
      ctx.sim[p][g] = similarity(gts[g], det, sigmas);
    }
  }
  return ctx;
}

MatchFragment match_context(const ImageContext& ctx, double threshold, const AreaRange& range,
                            const EvalParams& params) {
  const std::size_t num_gt = ctx.gts.size();
  const std::size_t num_det = ctx.order.size();

  MatchFragment out;
  out.threshold = threshold;
  out.det_order = ctx.order;
  out.det_scores.resize(num_det);
  out.det_match.assign(num_det, std::nullopt);
  out.det_ignored.assign(num_det, false);
  out.gt_ignored.resize(num_gt);
  out.gt_match_count.assign(num_gt, 0);

  for (std::size_t g = 0; g < num_gt; ++g) {
    const auto& gt = ctx.gts[g];
    out.gt_ignored[g] = gt.is_ignore_region() || !range.contains(gt.area);
    if (!out.gt_ignored[g]) ++out.evaluated_gt_count;
  }

  const double floor_sim = std::min(threshold, 1.0 - 1e-10);
  for (std::size_t p = 0; p < num_det; ++p) {
    out.det_scores[p] = ctx.dets[ctx.order[p]].score;
    const auto& sims = ctx.sim[p];
    std::optional<std::size_t> best;
    double best_sim = floor_sim;
    for (std::size_t g = 0; g < num_gt; ++g) {
      if (out.gt_ignored[g] || out.gt_match_count[g] > 0) continue;
      if (sims[g] < best_sim) continue;
      best_sim = sims[g];
      best = g;
    }
    if (!best) {
      for (std::size_t g = 0; g < num_gt; ++g) {
        if (!out.gt_ignored[g]) continue;
        // Crowd regions absorb any number of detections.
        if (out.gt_match_count[g] > 0 && !ctx.gts[g].iscrowd) continue;
        if (sims[g] < best_sim) continue;
        best_sim = sims[g];
        best = g;
      }
    }
    if (best) {
      out.det_match[p] = *best;
      out.det_ignored[p] = out.gt_ignored[*best];
      ++out.gt_match_count[*best];
    } else {
      out.det_ignored[p] = !range.contains(ctx.det_area[p]);
      if (params.unannotated_oks) {
        const double nearest = sims.empty() ? 0.0 : *std::max_element(sims.begin(), sims.end());
        if (nearest < *params.unannotated_oks) out.det_ignored[p] = true;
      }
    }
  }
  return out;
}

std::vector<Annotation> filter_gts(std::span<const Annotation> gts, IgnorePolicy policy) {
  std::vector<Annotation> kept;
  kept.reserve(gts.size());
  for (const auto& g : gts) {
    if (policy == IgnorePolicy::kDrop && g.is_ignore_region()) continue;
    kept.push_back(g);
  }
  return kept;
}

std::optional<std::size_t> find_threshold(const std::vector<double>& thresholds, double value) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (std::fabs(thresholds[i] - value) < 1e-9) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> find_range(const std::vector<AreaRange>& ranges,
                                      std::string_view name) {
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (ranges[i].name == name) return i;
  }
  return std::nullopt;
}

// Mean of the defined values, in iteration order.
class Mean {
 public:
  void add(const std::optional<double>& v) {
    if (v) {
      sum_ += *v;
      ++count_;
    }
  }
  std::optional<double> value() const {
    if (count_ == 0) return std::nullopt;
    return sum_ / static_cast<double>(count_);
  }

 private:
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace

std::vector<double> EvalParams::default_oks_thresholds() {
  // Same construction as numpy.linspace(0.5, 0.95, 10).
  std::vector<double> out(10);
  const double step = (0.95 - 0.5) / 9.0;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 + static_cast<double>(i) * step;
  out.back() = 0.95;
  return out;
}

std::vector<AreaRange> EvalParams::default_area_ranges() {
  const double inf = std::numeric_limits<double>::infinity();
  return {{"all", 0.0, inf}, {"medium", 32.0 * 32.0, 96.0 * 96.0}, {"large", 96.0 * 96.0, inf}};
}

void EvalParams::validate() const {
  if (oks_thresholds.empty()) throw ConfigError("at least one OKS threshold is required");
  for (std::size_t i = 0; i < oks_thresholds.size(); ++i) {
    const double t = oks_thresholds[i];
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("OKS thresholds must lie in (0, 1]");
    if (i > 0 && !(t > oks_thresholds[i - 1])) {
      throw ConfigError("OKS thresholds must be strictly increasing");
    }
  }
  if (area_ranges.empty()) throw ConfigError("at least one area range is required");
  for (const auto& r : area_ranges) {
    if (!(r.lo < r.hi)) throw ConfigError("area range '" + r.name + "' is empty");
  }
  auto medium = find_range(area_ranges, "medium");
  auto large = find_range(area_ranges, "large");
  if (medium && large) {
    const auto& m = area_ranges[*medium];
    const auto& l = area_ranges[*large];
    if (m.lo < l.hi && l.lo < m.hi) throw ConfigError("medium and large area ranges overlap");
  }
  if (max_detections < 1) throw ConfigError("max_detections must be >= 1");
  if (unannotated_oks && !(*unannotated_oks >= 0.0 && *unannotated_oks <= 1.0)) {
    throw ConfigError("unannotated_oks must lie in [0, 1]");
  }
}

nlohmann::json metrics_to_json(const MetricSet& m) {
  auto v = [](const std::optional<double>& x) -> nlohmann::json {
    return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
  };
  return {{"mAP", v(m.map)},        {"AP50", v(m.ap50)},     {"AP75", v(m.ap75)},
          {"AP_M", v(m.ap_medium)}, {"AP_L", v(m.ap_large)}, {"mAR", v(m.mar)},
          {"AR50", v(m.ar50)},      {"AR75", v(m.ar75)},     {"AR_M", v(m.ar_medium)},
          {"AR_L", v(m.ar_large)}};
}

MetricSet metrics_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw ValidationError(std::vector<std::string>{"metrics must be a JSON object"});
  }
  std::vector<std::string> issues;
  auto get = [&](const char* key) -> std::optional<double> {
    if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
    if (!doc[key].is_number()) {
      issues.push_back(std::string(key) + ": expected a number or null");
      return std::nullopt;
    }
    const double v = doc[key].get<double>();
    if (!(v >= 0.0 && v <= 1.0)) {
      issues.push_back(std::string(key) + ": value outside [0, 1]");
    }
    return v;
  };
  MetricSet m{get("mAP"),  get("AP50"), get("AP75"), get("AP_M"), get("AP_L"),
              get("mAR"),  get("AR50"), get("AR75"), get("AR_M"), get("AR_L")};
  if (!issues.empty()) throw ValidationError("invalid metrics:", std::move(issues));
  return m;
}

double compute_oks(const Annotation& gt, std::span<const double> det_keypoints,
                   std::span<const double> sigmas) {
  if (det_keypoints.size() != gt.keypoints.size() || sigmas.size() * 3 != gt.keypoints.size()) {
    throw UsageError("OKS arity mismatch between ground truth, detection and sigmas");
  }
  double total = 0.0;
  int visible = 0;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(gt.keypoints[3 * i + 2] > 0.0)) continue;
    const double dx = det_keypoints[3 * i] - gt.keypoints[3 * i];
    const double dy = det_keypoints[3 * i + 1] - gt.keypoints[3 * i + 1];
    const double k = 2.0 * sigmas[i];
    total += std::exp(-(dx * dx + dy * dy) / (2.0 * gt.area * k * k));
    ++visible;
  }
  if (visible == 0) throw UsageError("OKS is undefined for an instance without labeled keypoints");
  return total / visible;
}

double detection_area(const Prediction& det) {
  const std::size_t k = det.keypoints.size() / 3;
  if (k == 0) return 0.0;
  double x0 = det.keypoints[0];
  double x1 = x0;
  double y0 = det.keypoints[1];
  double y1 = y0;
  for (std::size_t i = 1; i < k; ++i) {
    x0 = std::min(x0, det.keypoints[3 * i]);
    x1 = std::max(x1, det.keypoints[3 * i]);
    y0 = std::min(y0, det.keypoints[3 * i + 1]);
    y1 = std::max(y1, det.keypoints[3 * i + 1]);
  }
  return (x1 - x0) * (y1 - y0);
}

MatchFragment match_image(std::span<const Annotation> gts, std::span<const Prediction> dets,
                          double threshold, const EvalParams& params,
                          std::span<const double> sigmas, const AreaRange& range) {
  const auto kept = filter_gts(gts, params.ignore_policy);
  const auto ctx = make_context(kept, dets, params, sigmas);
  return match_context(ctx, threshold, range, params);
}

MatchFragment match_image(std::span<const Annotation> gts, std::span<const Prediction> dets,
                          double threshold, const EvalParams& params,
                          std::span<const double> sigmas) {
  return match_image(gts, dets, threshold, params, sigmas, AreaRange{"all"});
}

MatchLedger build_ledger(const DatasetIndex& index, std::span<const Prediction> predictions,
                         const EvalParams& params, int workers) {
  params.validate();
  // Group detections per (image, category), preserving input order.
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<Prediction>> dets_by_key;
  for (const auto& p : predictions) {
    if (!index.contains_image(p.image_id)) {
      throw ValidationError(
          std::vector<std::string>{"prediction for unknown image_id " + std::to_string(p.image_id)});
    }
    dets_by_key[{p.image_id, p.category_id}].push_back(p);
  }

  const auto& images = index.images();
  std::vector<std::vector<LedgerEntry>> per_image(images.size());
  parallel_for(images.size(), workers, [&](std::size_t i) {
    const auto image_id = images[i].id;
    for (const auto& cat : index.categories()) {
      std::vector<Annotation> gts;
      for (std::size_t a : index.annotation_indices(image_id)) {
        const auto& ann = index.annotations()[a];
        if (ann.category_id == cat.id) gts.push_back(ann);
      }
      gts = filter_gts(gts, params.ignore_policy);
      auto it = dets_by_key.find({image_id, cat.id});
      const std::span<const Prediction> dets =
          it == dets_by_key.end() ? std::span<const Prediction>{} : std::span(it->second);
      if (gts.empty() && dets.empty()) continue;

      const auto ctx = make_context(gts, dets, params, cat.sigmas);
      for (std::size_t a = 0; a < params.area_ranges.size(); ++a) {
        LedgerEntry entry{image_id, cat.id, a, {}};
        entry.per_threshold.reserve(params.oks_thresholds.size());
        for (double t : params.oks_thresholds) {
          entry.per_threshold.push_back(match_context(ctx, t, params.area_ranges[a], params));
        }
        per_image[i].push_back(std::move(entry));
      }
    }
  });

  MatchLedger ledger;
  for (auto& entries : per_image) {
    for (auto& e : entries) ledger.entries.push_back(std::move(e));
  }
  return ledger;
}

MetricSet accumulate_and_summarize(const MatchLedger& ledger, const DatasetIndex& index,
                                   const EvalParams& params) {
  params.validate();
  const std::size_t num_t = params.oks_thresholds.size();
  const std::size_t num_a = params.area_ranges.size();
  const auto& cats = index.categories();

  std::vector<double> recall_points(kRecallPoints);
  for (int r = 0; r < kRecallPoints; ++r) recall_points[static_cast<std::size_t>(r)] = r * 0.01;

  // ap[a][t][k], ar[a][t][k]
  using Grid = std::vector<std::vector<std::vector<std::optional<double>>>>;
  Grid ap(num_a, std::vector<std::vector<std::optional<double>>>(
                     num_t, std::vector<std::optional<double>>(cats.size())));
  Grid ar = ap;

  for (std::size_t k = 0; k < cats.size(); ++k) {
    for (std::size_t a = 0; a < num_a; ++a) {
      std::vector<const LedgerEntry*> entries;
      for (const auto& e : ledger.entries) {
        if (e.category_id == cats[k].id && e.area_index == a) entries.push_back(&e);
      }
      std::size_t evaluated_gts = 0;
      for (const auto* e : entries) {
        if (!e->per_threshold.empty()) evaluated_gts += e->per_threshold.front().evaluated_gt_count;
      }
      if (evaluated_gts == 0) continue;

      for (std::size_t t = 0; t < num_t; ++t) {
        struct Det {
          double score;
          bool matched;
          bool ignored;
        };
        std::vector<Det> dets;
        for (const auto* e : entries) {
          const auto& f = e->per_threshold[t];
          for (std::size_t p = 0; p < f.det_scores.size(); ++p) {
            dets.push_back({f.det_scores[p], f.det_match[p].has_value(), f.det_ignored[p]});
          }
        }
        std::stable_sort(dets.begin(), dets.end(),
                         [](const Det& x, const Det& y) { return x.score > y.score; });

        std::vector<double> precision;
        std::vector<double> recall;
        std::size_t tp = 0;
        std::size_t fp = 0;
        for (const auto& d : dets) {
          if (d.ignored) continue;
          (d.matched ? tp : fp) += 1;
          recall.push_back(static_cast<double>(tp) / static_cast<double>(evaluated_gts));
          precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        }
        ar[a][t][k] = recall.empty() ? 0.0 : recall.back();

        for (std::size_t i = precision.size(); i-- > 1;) {
          precision[i - 1] = std::max(precision[i - 1], precision[i]);
        }
        double sum = 0.0;
        for (double r : recall_points) {
          auto it = std::lower_bound(recall.begin(), recall.end(), r);
          if (it != recall.end()) {
            sum += precision[static_cast<std::size_t>(it - recall.begin())];
          }
        }
        ap[a][t][k] = sum / static_cast<double>(kRecallPoints);
      }
    }
  }

  auto summarize = [&](const Grid& grid, std::optional<std::size_t> t_only,
                       std::optional<std::size_t> area) -> std::optional<double> {
    if (!area) return std::nullopt;
    Mean mean;
    for (std::size_t t = 0; t < num_t; ++t) {
      if (t_only && t != *t_only) continue;
      for (std::size_t k = 0; k < cats.size(); ++k) mean.add(grid[*area][t][k]);
    }
    return mean.value();
  };

  const auto all = find_range(params.area_ranges, "all").value_or(0);
  const auto medium = find_range(params.area_ranges, "medium");
  const auto large = find_range(params.area_ranges, "large");
  const auto t50 = find_threshold(params.oks_thresholds, 0.5);
  const auto t75 = find_threshold(params.oks_thresholds, 0.75);

  MetricSet m;
  m.map = summarize(ap, std::nullopt, all);
  m.ap50 = t50 ? summarize(ap, t50, all) : std::nullopt;
  m.ap75 = t75 ? summarize(ap, t75, all) : std::nullopt;
  m.ap_medium = summarize(ap, std::nullopt, medium);
  m.ap_large = summarize(ap, std::nullopt, large);
  m.mar = summarize(ar, std::nullopt, all);
  m.ar50 = t50 ? summarize(ar, t50, all) : std::nullopt;
  m.ar75 = t75 ? summarize(ar, t75, all) : std::nullopt;
  m.ar_medium = summarize(ar, std::nullopt, medium);
  m.ar_large = summarize(ar, std::nullopt, large);
  return m;
}

MetricSet evaluate(const DatasetIndex& index, std::span<const Prediction> predictions,
                   const EvalParams& params, int workers) {
  return accumulate_and_summarize(build_ledger(index, predictions, params, workers), index, params);
}

}  // namespace kpbench
