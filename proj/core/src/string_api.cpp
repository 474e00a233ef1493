#include "kpbench/string_api.hpp"

#include <cmath>

#include "kpbench/augmentation.hpp"
#include "kpbench/corruption.hpp"
#include "kpbench/error.hpp"

namespace kpbench {
namespace {

void check_keys(const nlohmann::json& options, std::initializer_list<std::string_view> allowed) {
  if (!options.is_object()) throw ConfigError("options must be an object");
  for (const auto& item : options.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) throw ConfigError("unknown option '" + item.key() + "'");
  }
}

template <typename T>
T get_option(const nlohmann::json& options, const char* key) {
  try {
    return options.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("option '") + key + "' has the wrong type");
  }
}

int to_int(const nlohmann::json& value) {
  if (!value.is_number()) throw ConfigError("option 'keypoints' must hold numbers");
  return static_cast<int>(std::round(value.get<double>()));
}

MaskTargetSet parse_targets(const nlohmann::json& doc) {
  if (!doc.is_array()) throw ConfigError("option 'keypoints' must be an array of [x, y, v]");
  MaskTargetSet targets;
  for (const auto& kp : doc) {
    if (!kp.is_array() || kp.size() != 3) {
      throw ConfigError("option 'keypoints' must be an array of [x, y, v]");
    }
    targets.push_back({to_int(kp[0]), to_int(kp[1]), to_int(kp[2])});
  }
  return targets;
}

}  // namespace

std::vector<std::string> corruption_kinds() {
  std::vector<std::string> names;
  for (auto kind : kAllCorruptions) names.emplace_back(kind_name(kind));
  return names;
}

RgbImage apply_named(const RgbImage& img, std::string_view kind, int severity,
                     std::uint64_t global_seed, const nlohmann::json& options) {
  check_keys(options, {"image_id", "profile", "noise_gain", "mask_fill", "keypoints"});
  CorruptionSpec spec;
  spec.kind = parse_corruption_kind(kind);
  spec.severity = Severity(severity);
  spec.global_seed = global_seed;
  if (options.contains("image_id")) spec.image_id = get_option<std::int64_t>(options, "image_id");
  if (options.contains("profile")) {
    spec.profile = parse_dataset_profile(get_option<std::string>(options, "profile"));
  }
  if (options.contains("noise_gain")) {
    spec.overrides.noise_gain = get_option<double>(options, "noise_gain");
  }
  if (options.contains("mask_fill")) {
    const int fill = get_option<int>(options, "mask_fill");
    if (fill < 0 || fill > 255) throw ConfigError("option 'mask_fill' must be in [0, 255]");
    spec.overrides.mask_fill = static_cast<std::uint8_t>(fill);
  }
  if (spec.kind == CorruptionKind::kMask) {
    if (!options.contains("keypoints")) {
      throw UsageError("corruption 'mask' requires the 'keypoints' option");
    }
    const auto targets = parse_targets(options.at("keypoints"));
    return apply(img, spec, targets);
  }
  return apply(img, spec);
}

RgbImage apply_pipeline_named(const RgbImage& img, const std::vector<std::string>& sets,
                              std::uint64_t seed, const nlohmann::json& options) {
  check_keys(options, {"probability", "ranges"});
  std::vector<AugmentationSetId> ids;
  for (const auto& name : sets) ids.push_back(parse_augmentation_set(name));
  auto ranges = AugmentationRanges::defaults();
  if (options.contains("ranges")) ranges.apply_overrides(options.at("ranges"));
  const double p = options.contains("probability") ? get_option<double>(options, "probability")
                                                    : 0.5;
  return apply_pipeline(build_pipeline(ids, ranges, p), img, seed);
}

}  // namespace kpbench
