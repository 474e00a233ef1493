#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpbench/keypoint_data.hpp"

namespace kpbench {

// Half-open area interval [lo, hi) in squared pixels.
struct AreaRange {
  std::string name;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double area) const noexcept { return area >= lo && area < hi; }
};

enum class IgnorePolicy {
  kIgnore,  // crowd / zero-keypoint instances absorb nearby detections
  kDrop,    // such instances are removed; detections near them become false positives
};

struct EvalParams {
  std::vector<double> oks_thresholds = default_oks_thresholds();
  // Index 0 must be the "all" range; medium and large are looked up by name.
  std::vector<AreaRange> area_ranges = default_area_ranges();
  int max_detections = 20;
  IgnorePolicy ignore_policy = IgnorePolicy::kIgnore;
  // For partially labeled datasets: an unmatched detection whose similarity
  // to every gt of its image stays below this value is ignored instead of
  // counted as a false positive. Unset means every detection counts.
  std::optional<double> unannotated_oks;

  // 0.50, 0.55, ..., 0.95
  static std::vector<double> default_oks_thresholds();
  // all = [0, inf), medium = [32^2, 96^2), large = [96^2, inf)
  static std::vector<AreaRange> default_area_ranges();

  // Throws ConfigError when an invariant does not hold.
  void validate() const;
};

// Ten COCO-style summary numbers. nullopt means the ground-truth stratum was
// empty (rendered as NA / null).
struct MetricSet {
  std::optional<double> map;
  std::optional<double> ap50;
  std::optional<double> ap75;
  std::optional<double> ap_medium;
  std::optional<double> ap_large;
  std::optional<double> mar;
  std::optional<double> ar50;
  std::optional<double> ar75;
  std::optional<double> ar_medium;
  std::optional<double> ar_large;

  friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

// Keys: mAP, AP50, AP75, AP_M, AP_L, mAR, AR50, AR75, AR_M, AR_L; null for undefined.
nlohmann::json metrics_to_json(const MetricSet& metrics);
MetricSet metrics_from_json(const nlohmann::json& doc);

// exp(-d^2 / (2 * area * (2*sigma)^2)) averaged over keypoints with v > 0.
// Throws UsageError when the instance has no labeled keypoint or arities differ.
double compute_oks(const Annotation& gt, std::span<const double> det_keypoints,
                   std::span<const double> sigmas);

// Area of the detection's keypoint extent box, used for area-range filtering.
double detection_area(const Prediction& det);

// Greedy matching result for one image, one category, one area range and one
// OKS threshold.
struct MatchFragment {
  double threshold = 0.0;
  // Detections considered, best score first (equal scores ordered by their
  // keypoint values), truncated to max_detections.
  // Values are indices into the `dets` span given to match_image.
  std::vector<std::size_t> det_order;
  std::vector<double> det_scores;                     // parallel to det_order
  std::vector<std::optional<std::size_t>> det_match;  // gt index into `gts`
  std::vector<bool> det_ignored;
  std::vector<bool> gt_ignored;
  std::vector<int> gt_match_count;
  std::size_t evaluated_gt_count = 0;  // gts that are not ignored
};

// `gts` and `dets` must share one image and category. Each detection, in score
// order, takes the unmatched evaluated gt with the highest OKS >= threshold;
// failing that it may land on an ignored gt and is then ignored itself. Crowd
// gts accept any number of detections, every other gt at most one. A gt
// without labeled keypoints scores 1 against a detection whose keypoint
// centroid lies inside its bbox and 0 otherwise.
MatchFragment match_image(std::span<const Annotation> gts, std::span<const Prediction> dets,
                          double threshold, const EvalParams& params,
                          std::span<const double> sigmas, const AreaRange& range);
MatchFragment match_image(std::span<const Annotation> gts, std::span<const Prediction> dets,
                          double threshold, const EvalParams& params,
                          std::span<const double> sigmas);

// All fragments of one (image, category, area range), one per threshold.
struct LedgerEntry {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  std::size_t area_index = 0;
  std::vector<MatchFragment> per_threshold;
};

struct MatchLedger {
  std::vector<LedgerEntry> entries;
};

// Runs match_image for every image of `index` (in index order), every category
// and every area range. `workers` > 1 processes images concurrently; the
// resulting ledger does not depend on it.
MatchLedger build_ledger(const DatasetIndex& index, std::span<const Prediction> predictions,
                         const EvalParams& params, int workers = 1);

MetricSet accumulate_and_summarize(const MatchLedger& ledger, const DatasetIndex& index,
                                   const EvalParams& params);

MetricSet evaluate(const DatasetIndex& index, std::span<const Prediction> predictions,
                   const EvalParams& params = {}, int workers = 1);

}  // namespace kpbench
