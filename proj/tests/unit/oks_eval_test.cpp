#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "coco_oracle.hpp"
#include "kpbench/error.hpp"
#include "kpbench/oks_eval.hpp"
#include "kpbench/random.hpp"
#include "test_support.hpp"

namespace kpbench {
namespace {

using nlohmann::json;

std::vector<std::optional<double>> as_vector(const MetricSet& m) {
  return {m.map, m.ap50, m.ap75, m.ap_medium, m.ap_large,
          m.mar, m.ar50, m.ar75, m.ar_medium, m.ar_large};
}

Annotation make_gt(std::vector<double> kps, double area) {
  Annotation gt;
  gt.id = 1;
  gt.image_id = 1;
  gt.category_id = 1;
  gt.keypoints = std::move(kps);
  for (std::size_t i = 2; i < gt.keypoints.size(); i += 3) gt.num_keypoints += gt.keypoints[i] > 0;
  gt.area = area;
  gt.bbox = {0, 0, 100, 100};
  return gt;
}

Prediction make_det(std::vector<double> kps, double score) {
  Prediction p;
  p.image_id = 1;
  p.category_id = 1;
  p.keypoints = std::move(kps);
  p.score = score;
  return p;
}

MetricSet evaluate_json(const json& gt, const json& preds, const EvalParams& params = {},
                        int workers = 1) {
  const auto index = DatasetIndex::from_json(gt);
  const auto dets = parse_predictions(preds, index);
  return evaluate(index, dets, params, workers);
}

// The oracle breaks score ties by input position; presenting predictions in
// keypoint order makes that coincide with the library's tie rule.
json tie_ordered(json preds) {
  std::stable_sort(preds.begin(), preds.end(), [](const json& a, const json& b) {
    const auto ka = a["keypoints"].get<std::vector<double>>();
    const auto kb = b["keypoints"].get<std::vector<double>>();
    return ka < kb;
  });
  return preds;
}

void expect_oracle_equal(const testing::TinyInstance& inst, std::uint64_t seed) {
  const json preds = tie_ordered(inst.predictions);
  const auto ours = as_vector(evaluate_json(inst.gt, preds));
  const auto ref = testing::coco_oracle(inst.gt, preds).values;
  ASSERT_EQ(ref.size(), ours.size());
  for (std::size_t i = 0; i < ours.size(); ++i) {
    ASSERT_EQ(ours[i].has_value(), ref[i].has_value()) << "seed " << seed << " metric " << i;
    if (ours[i]) ASSERT_NEAR(*ours[i], *ref[i], 1e-12) << "seed " << seed << " metric " << i;
  }
}

TEST(ComputeOks, Examples) {
  const std::vector<double> sigma = {0.05};
  const double area = 400.0;
  const double k = 2 * 0.05;
  const double d = std::sqrt(2 * area * k * k);
  const auto gt = make_gt({10, 20, 2}, area);
  const double exact[] = {10, 20, 1};
  EXPECT_DOUBLE_EQ(compute_oks(gt, exact, sigma), 1.0);
  const double off[] = {10 + d, 20, 1};
  EXPECT_NEAR(compute_oks(gt, off, sigma), 0.36788, 1e-5);
  EXPECT_NEAR(compute_oks(gt, off, sigma), std::exp(-1.0), 1e-14);

  const std::vector<double> sigmas2 = {0.05, 0.05};
  const auto gt2 = make_gt({10, 20, 2, 50, 50, 1}, area);
  const double half[] = {10, 20, 1, 50, 50 + d, 1};
  EXPECT_NEAR(compute_oks(gt2, half, sigmas2), 0.68394, 1e-5);
}

TEST(ComputeOks, IgnoresUnlabeledKeypointsAndRejectsBadInput) {
  const std::vector<double> sigmas = {0.05, 0.05};
  const auto gt = make_gt({10, 20, 2, 50, 50, 0}, 100.0);
  const double det[] = {10, 20, 1, 500, 500, 1};
  EXPECT_DOUBLE_EQ(compute_oks(gt, det, sigmas), 1.0);
  const double short_det[] = {10, 20, 1};
  EXPECT_THROW(compute_oks(gt, short_det, sigmas), UsageError);
  const auto unlabeled = make_gt({10, 20, 0, 50, 50, 0}, 100.0);
  EXPECT_THROW(compute_oks(unlabeled, det, sigmas), UsageError);
}

TEST(MatchImage, SingleMatch) {
  const std::vector<double> sigma = {0.05};
  const Annotation gts[] = {make_gt({10, 10, 2}, 400)};
  const Prediction dets[] = {make_det({10.5, 10, 1}, 0.9)};
  const auto frag = match_image(gts, dets, 0.5, EvalParams{}, sigma);
  ASSERT_EQ(frag.det_match.size(), 1u);
  EXPECT_EQ(frag.det_match[0], std::optional<std::size_t>(0));
  EXPECT_FALSE(frag.det_ignored[0]);
  EXPECT_EQ(frag.evaluated_gt_count, 1u);
}

TEST(MatchImage, GreedyByScore) {
  const std::vector<double> sigma = {0.05};
  const Annotation gts[] = {make_gt({10, 10, 2}, 400)};
  const Prediction dets[] = {make_det({10.2, 10, 1}, 0.8), make_det({10.4, 10, 1}, 0.9)};
  const auto frag = match_image(gts, dets, 0.5, EvalParams{}, sigma);
  EXPECT_EQ(frag.det_order, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(frag.det_match[0], std::optional<std::size_t>(0));
  EXPECT_FALSE(frag.det_match[1].has_value());
  EXPECT_FALSE(frag.det_ignored[1]);
  EXPECT_EQ(frag.gt_match_count[0], 1);
}

TEST(MatchImage, UnlabeledGtAbsorbsDetection) {
  const std::vector<double> sigma = {0.05};
  Annotation empty = make_gt({10, 10, 0}, 0);
  empty.bbox = {0, 0, 50, 50};
  const Annotation gts[] = {empty};
  const Prediction dets[] = {make_det({20, 20, 1}, 0.9)};
  const auto frag = match_image(gts, dets, 0.5, EvalParams{}, sigma);
  EXPECT_TRUE(frag.det_ignored[0]);
  EXPECT_TRUE(frag.gt_ignored[0]);
  EXPECT_EQ(frag.evaluated_gt_count, 0u);

  EvalParams drop;
  drop.ignore_policy = IgnorePolicy::kDrop;
  const auto dropped = match_image(gts, dets, 0.5, drop, sigma);
  EXPECT_FALSE(dropped.det_ignored[0]);
}

TEST(MatchImage, CrowdAbsorbsSeveralDetections) {
  const std::vector<double> sigma = {0.05};
  Annotation crowd = make_gt({10, 10, 2}, 400);
  crowd.iscrowd = true;
  const Annotation gts[] = {crowd};
  const Prediction dets[] = {make_det({10, 10, 1}, 0.9), make_det({10.1, 10, 1}, 0.8)};
  const auto frag = match_image(gts, dets, 0.5, EvalParams{}, sigma);
  EXPECT_TRUE(frag.det_ignored[0]);
  EXPECT_TRUE(frag.det_ignored[1]);
}

TEST(MatchImage, MaxDetectionsTruncates) {
  const std::vector<double> sigma = {0.05};
  const Annotation gts[] = {make_gt({10, 10, 2}, 400)};
  std::vector<Prediction> dets;
  for (int i = 0; i < 30; ++i) dets.push_back(make_det({10, 10, 1}, i / 30.0));
  EvalParams params;
  const auto frag = match_image(gts, dets, 0.5, params, sigma);
  EXPECT_EQ(frag.det_order.size(), 20u);
  EXPECT_EQ(frag.det_order.front(), 29u);
}

TEST(EvalParams, Validation) {
  EvalParams p;
  EXPECT_NO_THROW(p.validate());
  ASSERT_EQ(p.oks_thresholds.size(), 10u);
  EXPECT_DOUBLE_EQ(p.oks_thresholds.front(), 0.5);
  EXPECT_DOUBLE_EQ(p.oks_thresholds.back(), 0.95);
  EXPECT_EQ(p.area_ranges[1].lo, 1024.0);
  EXPECT_EQ(p.area_ranges[1].hi, 9216.0);
  EXPECT_TRUE(p.area_ranges[2].contains(9216.0));
  EXPECT_FALSE(p.area_ranges[1].contains(9216.0));

  auto bad = p;
  bad.oks_thresholds = {0.5, 0.5};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = p;
  bad.oks_thresholds = {0.0, 0.5};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = p;
  bad.max_detections = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = p;
  bad.area_ranges[1].hi = 20000;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = p;
  bad.unannotated_oks = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Evaluate, PerfectPredictions) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = testing::make_tiny_instance(seed);
    json preds = json::array();
    for (const auto& a : inst.gt["annotations"]) {
      if (a["iscrowd"].get<int>() == 1 || a["num_keypoints"].get<int>() == 0) continue;
      preds.push_back({{"image_id", a["image_id"]},
                       {"category_id", a["category_id"]},
                       {"keypoints", a["keypoints"]},
                       {"score", 1.0}});
    }
    for (const auto& v : as_vector(evaluate_json(inst.gt, preds))) {
      if (v) EXPECT_DOUBLE_EQ(*v, 1.0) << "seed " << seed;
    }
  }
}

TEST(Evaluate, EmptyPredictionsGiveZero) {
  json gt = testing::make_tiny_instance(3).gt;
  const auto m = evaluate_json(gt, json::array());
  bool any_gt = false;
  for (const auto& a : gt["annotations"]) {
    any_gt = any_gt || (a["iscrowd"].get<int>() == 0 && a["num_keypoints"].get<int>() > 0);
  }
  ASSERT_TRUE(any_gt);
  EXPECT_EQ(m.map, 0.0);
  EXPECT_EQ(m.mar, 0.0);
}

TEST(Evaluate, UndefinedStrata) {
  json gt = {{"images", {{{"id", 1}, {"file_name", "a"}, {"width", 10}, {"height", 10}}}},
             {"annotations", json::array()},
             {"categories", {{{"id", 1}, {"name", "p"}, {"sigmas", {0.05}}}}}};
  const auto m = evaluate_json(gt, json::array());
  for (const auto& v : as_vector(m)) EXPECT_FALSE(v.has_value());
  const auto j = metrics_to_json(m);
  EXPECT_TRUE(j["mAP"].is_null());
  EXPECT_EQ(metrics_from_json(j), m);
}

TEST(Evaluate, MetricsJsonRoundTripAndValidation) {
  MetricSet m;
  m.map = 0.25;
  m.ar_large = 1.0;
  EXPECT_EQ(metrics_from_json(metrics_to_json(m)), m);
  EXPECT_THROW(metrics_from_json(json{{"mAP", 1.5}}), ValidationError);
  EXPECT_THROW(metrics_from_json(json{{"mAP", "x"}}), ValidationError);
}

TEST(Evaluate, UnannotatedOksIgnoresDetectionsFarFromEveryGt) {
  const auto inst = testing::make_tiny_instance(11);
  json preds = inst.predictions;
  EvalParams permissive;
  permissive.unannotated_oks = 0.1;
  const auto base = evaluate_json(inst.gt, preds, permissive);
  EXPECT_NE(base, evaluate_json(inst.gt, preds));
  for (const auto& img : inst.gt["images"]) {
    preds.push_back({{"image_id", img["id"]},
                     {"category_id", 1},
                     {"keypoints", {5000, 5000, 1, 5001, 5000, 1, 5000, 5001, 1, 5001, 5001, 1,
                                    5002, 5002, 1}},
                     {"score", 1.0}});
  }
  EXPECT_EQ(evaluate_json(inst.gt, preds, permissive), base);
}

TEST(EvaluateProperties, MatchesCocoOracle) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    expect_oracle_equal(testing::make_tiny_instance(seed), seed);
  }
}

TEST(EvaluateProperties, WorkerCountDoesNotMatter) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = testing::make_tiny_instance(seed);
    EXPECT_EQ(evaluate_json(inst.gt, inst.predictions, {}, 1),
              evaluate_json(inst.gt, inst.predictions, {}, 4));
  }
}

TEST(EvaluateProperties, PermutationInvariant) {
  std::mt19937_64 shuffler(5);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto inst = testing::make_tiny_instance(seed);
    const auto base = evaluate_json(inst.gt, inst.predictions);
    for (const auto& v : as_vector(base)) {
      if (v) ASSERT_TRUE(*v >= 0.0 && *v <= 1.0);
    }
    for (int rep = 0; rep < 3; ++rep) {
      json shuffled = inst.predictions;
      std::shuffle(shuffled.begin(), shuffled.end(), shuffler);
      ASSERT_EQ(evaluate_json(inst.gt, shuffled), base) << "seed " << seed;
    }
  }
}

TEST(EvaluateProperties, LowerScoredDuplicateNeverRaisesAp) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto inst = testing::make_tiny_instance(seed);
    if (inst.predictions.empty()) continue;
    const auto base = as_vector(evaluate_json(inst.gt, inst.predictions));
    for (std::size_t i = 0; i < inst.predictions.size(); ++i) {
      json preds = inst.predictions;
      json dup = preds[i];
      dup["score"] = dup["score"].get<double>() * 0.5;
      preds.push_back(dup);
      const auto with_dup = as_vector(evaluate_json(inst.gt, preds));
      for (std::size_t m = 0; m < 5; ++m) {
        if (base[m]) ASSERT_LE(*with_dup[m], *base[m] + 1e-12) << "seed " << seed << " det " << i;
      }
    }
  }
}

TEST(EvaluateProperties, MonotoneInPerturbationRadius) {
  testing::TempDir dir;
  testing::write_synthetic_dataset(dir.path(), 30, 7);
  const auto index = load_annotations(dir / "gt.json");
  Rng rng(99);
  std::vector<double> angles;
  for (std::size_t i = 0; i < index.annotations().size() * 17; ++i) {
    angles.push_back(rng.uniform(0.0, 2 * 3.14159265358979));
  }
  double previous = 2.0;
  for (double r : {0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0}) {
    std::vector<Prediction> preds;
    std::size_t a = 0;
    for (const auto& gt : index.annotations()) {
      Prediction p;
      p.image_id = gt.image_id;
      p.category_id = gt.category_id;
      p.score = 1.0;
      for (std::size_t k = 0; k < gt.keypoint_count(); ++k, ++a) {
        p.keypoints.push_back(gt.keypoints[3 * k] + r * std::cos(angles[a]));
        p.keypoints.push_back(gt.keypoints[3 * k + 1] + r * std::sin(angles[a]));
        p.keypoints.push_back(1.0);
      }
      preds.push_back(std::move(p));
    }
    const double map = *evaluate(index, preds).map;
    EXPECT_LE(map, previous) << "radius " << r;
    previous = map;
  }
  EXPECT_LT(previous, 0.5);
}

}  // namespace
}  // namespace kpbench
