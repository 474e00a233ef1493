#include "kpbench/augmentation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include "kpbench/error.hpp"

namespace kpbench {
namespace {

struct TransformInfo {
  TransformId id;
  std::string_view name;
  AugmentationSetId set;
};

constexpr std::array<TransformInfo, 19> kTransforms = {{
    {TransformId::kBoxBlur, "box_blur", AugmentationSetId::kA},
    {TransformId::kMedianBlur, "median_blur", AugmentationSetId::kA},
    {TransformId::kGaussianBlur, "gaussian_blur", AugmentationSetId::kA},
    {TransformId::kGaussianNoise, "gaussian_noise", AugmentationSetId::kA},
    {TransformId::kIsoNoise, "iso_noise", AugmentationSetId::kA},
    {TransformId::kMotionBlur, "motion_blur", AugmentationSetId::kA},
    {TransformId::kColorJitter, "color_jitter", AugmentationSetId::kB},
    {TransformId::kJpegReencode, "jpeg_reencode", AugmentationSetId::kB},
    {TransformId::kRgbShift, "rgb_shift", AugmentationSetId::kB},
    {TransformId::kToGray, "to_gray", AugmentationSetId::kB},
    {TransformId::kPixelDropout, "pixel_dropout", AugmentationSetId::kB},
    {TransformId::kHsvJitter, "hsv_jitter", AugmentationSetId::kC},
    {TransformId::kBrightnessJitter, "brightness_jitter", AugmentationSetId::kC},
    {TransformId::kContrastJitter, "contrast_jitter", AugmentationSetId::kC},
    {TransformId::kGammaJitter, "gamma_jitter", AugmentationSetId::kC},
    {TransformId::kShadowPolygon, "shadow_polygon", AugmentationSetId::kC},
    {TransformId::kXyMasking, "xy_masking", AugmentationSetId::kD},
    {TransformId::kGridDropout, "grid_dropout", AugmentationSetId::kD},
    {TransformId::kCoarseDropout, "coarse_dropout", AugmentationSetId::kD},
}};

const TransformInfo& info(TransformId id) { return kTransforms[static_cast<std::size_t>(id)]; }

}  // namespace

char set_letter(AugmentationSetId id) noexcept {
  return static_cast<char>('A' + static_cast<int>(id));
}

AugmentationSetId parse_augmentation_set(std::string_view name) {
  std::string s;
  for (char c : name) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'D') {
    return static_cast<AugmentationSetId>(s[0] - 'A');
  }
  throw UsageError("unknown augmentation set '" + std::string(name) + "' (valid: A, B, C, D)");
}

std::vector<AugmentationSetId> parse_augmentation_sets(std::string_view list) {
  std::vector<AugmentationSetId> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const auto token = list.substr(start, comma == std::string_view::npos ? list.npos : comma - start);
    if (!token.empty()) out.push_back(parse_augmentation_set(token));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view transform_name(TransformId id) noexcept { return info(id).name; }

AugmentationSetId set_of(TransformId id) noexcept { return info(id).set; }

std::vector<TransformId> set_members(AugmentationSetId id) {
  std::vector<TransformId> out;
  for (const auto& t : kTransforms) {
    if (t.set == id) out.push_back(t.id);
  }
  return out;
}

AugmentationRanges AugmentationRanges::defaults() {
  AugmentationRanges r;
  r.values = {
      {"box_blur.radius", {1, 3}},
      {"median_blur.radius", {1, 2}},
      {"gaussian_blur.sigma", {0.5, 2.0}},
      {"gaussian_noise.sigma", {1, 3}},
      {"iso_noise.intensity", {0.1, 0.5}},
      {"iso_noise.color_shift", {0.01, 0.05}},
      {"motion_blur.radius", {10, 15}},
      {"motion_blur.sigma", {3, 8}},
      {"color_jitter.brightness", {0.8, 1.2}},
      {"color_jitter.contrast", {0.8, 1.2}},
      {"color_jitter.saturation", {0.8, 1.2}},
      {"color_jitter.hue", {-0.05, 0.05}},
      {"jpeg_reencode.quality", {18, 60}},
      {"rgb_shift.shift", {-20, 20}},
      {"pixel_dropout.rate", {0.03, 0.09}},
      {"hsv_jitter.hue", {-0.05, 0.05}},
      {"hsv_jitter.saturation", {-0.2, 0.2}},
      {"hsv_jitter.value", {-0.2, 0.2}},
      {"brightness_jitter.delta", {-0.3, 0.3}},
      {"contrast_jitter.factor", {0.2, 1.0}},
      {"gamma_jitter.gamma", {0.5, 2.0}},
      {"shadow_polygon.vertices", {3, 6}},
      {"shadow_polygon.size", {0.2, 0.5}},
      {"shadow_polygon.darkness", {0.3, 0.7}},
      {"xy_masking.count", {1, 3}},
      {"xy_masking.width", {0.02, 0.08}},
      {"grid_dropout.unit", {0.1, 0.25}},
      {"grid_dropout.ratio", {0.3, 0.5}},
      {"coarse_dropout.holes", {1, 8}},
      {"coarse_dropout.size", {0.05, 0.15}},
  };
  return r;
}

const ParamRange& AugmentationRanges::at(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw ConfigError("unknown augmentation parameter '" + key + "'");
  return it->second;
}

void AugmentationRanges::apply_overrides(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("augmentation overrides must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "fill") {
      if (!value.is_number_integer() || value.get<int>() < 0 || value.get<int>() > 255) {
        throw ConfigError("augmentation fill must be an integer in [0, 255]");
      }
      fill = static_cast<std::uint8_t>(value.get<int>());
    } else if (key == "ranges") {
      if (!value.is_object()) throw ConfigError("augmentation ranges must be an object");
      for (const auto& [name, range] : value.items()) {
        if (!values.contains(name)) {
          throw ConfigError("unknown augmentation parameter '" + name + "'");
        }
        if (!range.is_array() || range.size() != 2 || !range[0].is_number() ||
            !range[1].is_number()) {
          throw ConfigError("range for '" + name + "' must be [lo, hi]");
        }
        ParamRange r{range[0].get<double>(), range[1].get<double>()};
        if (!(r.lo <= r.hi)) throw ConfigError("range for '" + name + "' has lo > hi");
        values[name] = r;
      }
    } else {
      throw ConfigError("unknown augmentation override key '" + key + "'");
    }
  }
}

nlohmann::json AugmentationRanges::to_json() const {
  nlohmann::json ranges = nlohmann::json::object();
  for (const auto& [k, r] : values) ranges[k] = {r.lo, r.hi};
  return {{"fill", fill}, {"ranges", ranges}};
}

AugmentationPipeline build_pipeline(std::span<const AugmentationSetId> sets,
                                    const AugmentationRanges& ranges, double probability) {
  if (sets.empty()) throw UsageError("at least one augmentation set is required");
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw ConfigError("augmentation probability must lie in [0, 1]");
  }
  std::vector<AugmentationSetId> sorted(sets.begin(), sets.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw UsageError("duplicate augmentation set in list");
  }
  AugmentationPipeline p;
  p.sets = sorted;
  p.ranges = ranges;
  for (auto s : sorted) {
    for (auto t : set_members(s)) p.steps.push_back({t, probability});
  }
  return p;
}

AugmentResult apply_pipeline_traced(const AugmentationPipeline& pipeline, const RgbImage& img,
                                    std::uint64_t seed) {
  AugmentResult result{img, {}};
  for (std::size_t i = 0; i < pipeline.steps.size(); ++i) {
    const auto& step = pipeline.steps[i];
    Rng rng(hash_key(std::to_string(seed) + "/" + std::to_string(i) + "/" +
                     std::string(transform_name(step.transform))));
    if (!(rng.uniform() < step.probability)) continue;
    result.image = apply_transform(step.transform, result.image, pipeline.ranges, rng);
    result.fired.push_back(step.transform);
  }
  return result;
}

RgbImage apply_pipeline(const AugmentationPipeline& pipeline, const RgbImage& img,
                        std::uint64_t seed) {
  return apply_pipeline_traced(pipeline, img, seed).image;
}

std::uint64_t augmentation_seed(std::uint64_t global_seed, std::int64_t image_id, int copy) {
  return hash_key(std::to_string(global_seed) + "/" + std::to_string(image_id) + "/" +
                  std::to_string(copy));
}

std::string AugmentManifest::to_csv() const {
  std::ostringstream out;
  out << "source_path,output_path,seed,transforms_fired\n";
  for (const auto& r : rows) {
    std::string fired;
    for (auto t : r.transforms_fired) {
      if (!fired.empty()) fired += ';';
      fired += transform_name(t);
    }
    out << r.source_path << ',' << r.output_path << ',' << r.seed << ',' << fired << '\n';
  }
  return out.str();
}

}  // namespace kpbench
