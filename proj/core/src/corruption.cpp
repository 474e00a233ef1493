#include "kpbench/corruption.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>

#include "kpbench/error.hpp"
#include "kpbench/random.hpp"

namespace kpbench {
namespace {

constexpr std::array<std::string_view, 10> kKindNames = {
    "motion_blur", "gaussian_noise", "impulse_noise", "pixelate", "jpeg_compression",
    "color_quant", "brightness",     "darkness",      "contrast", "mask"};

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.push_back(c == '-' || c == ' ' ? '_' : c);
  }
  return out;
}

// Severity table, levels 1..5.
constexpr std::array<MotionBlurParams, 5> kMotionBlur = {
    {{10, 3.0}, {15, 5.0}, {15, 8.0}, {15, 12.0}, {20, 15.0}}};
constexpr std::array<double, 5> kNoiseSigma = {1, 2, 3, 4, 6};
constexpr std::array<double, 5> kImpulsePercent = {3, 6, 9, 17, 27};
constexpr std::array<double, 5> kPixelatePercent = {60, 50, 40, 30, 25};
constexpr std::array<int, 5> kJpegQuality = {25, 18, 15, 10, 7};
constexpr std::array<int, 5> kQuantBits = {5, 4, 3, 2, 1};
constexpr std::array<double, 5> kBrightnessDelta = {0.1, 0.2, 0.3, 0.4, 0.5};
constexpr std::array<double, 5> kDarknessGamma = {0.6, 0.5, 0.4, 0.3, 0.2};
constexpr std::array<double, 5> kContrastFactor = {0.4, 0.3, 0.2, 0.1, 0.05};
// Indexed [profile][level]: COCO, OCHuman, AP10K.
constexpr std::array<std::array<int, 5>, 3> kMaskSize = {{
    {5, 10, 15, 20, 25},
    {20, 25, 30, 35, 40},
    {20, 25, 30, 35, 40},
}};

void check_profile(DatasetProfile profile) {
  if (static_cast<std::size_t>(profile) >= kMaskSize.size()) {
    throw ConfigError("unknown dataset profile " +
                      std::to_string(static_cast<int>(profile)));
  }
}

}  // namespace

std::string_view kind_name(CorruptionKind kind) noexcept {
  return kKindNames[kind_index(kind)];
}

std::size_t kind_index(CorruptionKind kind) noexcept {
  return static_cast<std::size_t>(kind);
}

CorruptionKind parse_corruption_kind(std::string_view name) {
  const auto key = normalize(name);
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (key == kKindNames[i]) return kAllCorruptions[i];
  }
  std::string valid;
  for (auto n : kKindNames) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  throw UsageError("unknown corruption '" + std::string(name) + "' (valid: " + valid + ")");
}

CorruptionGroup group_of(CorruptionKind kind) noexcept {
  switch (kind) {
    case CorruptionKind::kMotionBlur:
    case CorruptionKind::kGaussianNoise:
    case CorruptionKind::kImpulseNoise:
      return CorruptionGroup::kBlurNoise;
    case CorruptionKind::kPixelate:
    case CorruptionKind::kJpegCompression:
    case CorruptionKind::kColorQuant:
      return CorruptionGroup::kCompressionColor;
    case CorruptionKind::kBrightness:
    case CorruptionKind::kDarkness:
    case CorruptionKind::kContrast:
      return CorruptionGroup::kLighting;
    case CorruptionKind::kMask:
      break;
  }
  return CorruptionGroup::kMask;
}

std::string_view group_name(CorruptionGroup group) noexcept {
  switch (group) {
    case CorruptionGroup::kBlurNoise:
      return "blur_noise";
    case CorruptionGroup::kCompressionColor:
      return "compression_color";
    case CorruptionGroup::kLighting:
      return "lighting";
    case CorruptionGroup::kMask:
      break;
  }
  return "mask";
}

std::vector<CorruptionKind> group_members(CorruptionGroup group) {
  std::vector<CorruptionKind> out;
  for (auto kind : kAllCorruptions) {
    if (group_of(kind) == group) out.push_back(kind);
  }
  return out;
}

Severity::Severity(int level) : level_(level) {
  if (level < kMin || level > kMax) {
    throw DomainError("severity out of range: " + std::to_string(level) +
                      " (valid range 1..5)");
  }
}

std::string_view profile_name(DatasetProfile profile) noexcept {
  switch (profile) {
    case DatasetProfile::kCoco:
      return "coco";
    case DatasetProfile::kOcHuman:
      return "ochuman";
    case DatasetProfile::kAp10k:
      break;
  }
  return "ap10k";
}

DatasetProfile parse_dataset_profile(std::string_view name) {
  auto key = normalize(name);
  if (key.size() > 2 && key.ends_with("_c")) key.resize(key.size() - 2);
  if (key == "coco") return DatasetProfile::kCoco;
  if (key == "ochuman") return DatasetProfile::kOcHuman;
  if (key == "ap10k") return DatasetProfile::kAp10k;
  throw ConfigError("unknown dataset profile '" + std::string(name) +
                    "' (valid: coco, ochuman, ap10k)");
}

CorruptionKind params_kind(const CorruptionParams& params) noexcept {
  return kAllCorruptions[params.index()];
}

CorruptionParams lookup_params(CorruptionKind kind, Severity severity,
                               DatasetProfile profile) {
  const std::size_t i = severity.index();
  switch (kind) {
    case CorruptionKind::kMotionBlur:
      return kMotionBlur[i];
    case CorruptionKind::kGaussianNoise:
      return GaussianNoiseParams{kNoiseSigma[i]};
    case CorruptionKind::kImpulseNoise:
      return ImpulseNoiseParams{kImpulsePercent[i]};
    case CorruptionKind::kPixelate:
      return PixelateParams{kPixelatePercent[i]};
    case CorruptionKind::kJpegCompression:
      return JpegParams{kJpegQuality[i]};
    case CorruptionKind::kColorQuant:
      return ColorQuantParams{kQuantBits[i]};
    case CorruptionKind::kBrightness:
      return BrightnessParams{kBrightnessDelta[i]};
    case CorruptionKind::kDarkness:
      return DarknessParams{kDarknessGamma[i]};
    case CorruptionKind::kContrast:
      return ContrastParams{kContrastFactor[i]};
    case CorruptionKind::kMask:
      check_profile(profile);
      return MaskParams{kMaskSize[static_cast<std::size_t>(profile)][i]};
  }
  throw UsageError("unknown corruption kind");
}

std::string describe(const CorruptionParams& params) {
  std::ostringstream out;
  std::visit(
      [&out](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MotionBlurParams>) {
          out << "radius=" << p.radius << " sigma=" << p.sigma;
        } else if constexpr (std::is_same_v<T, GaussianNoiseParams>) {
          out << "sigma=" << p.sigma;
        } else if constexpr (std::is_same_v<T, ImpulseNoiseParams>) {
          out << "proportion=" << p.proportion_percent << "%";
        } else if constexpr (std::is_same_v<T, PixelateParams>) {
          out << "ratio=" << p.ratio_percent << "%";
        } else if constexpr (std::is_same_v<T, JpegParams>) {
          out << "quality=" << p.quality;
        } else if constexpr (std::is_same_v<T, ColorQuantParams>) {
          out << "bits=" << p.bits;
        } else if constexpr (std::is_same_v<T, BrightnessParams>) {
          out << "delta_v=" << p.delta_v;
        } else if constexpr (std::is_same_v<T, DarknessParams>) {
          out << "gamma=" << p.gamma;
        } else if constexpr (std::is_same_v<T, ContrastParams>) {
          out << "factor=" << p.factor;
        } else {
          out << "size=" << p.size;
        }
      },
      params);
  return out.str();
}

CorruptionParams resolve_params(const CorruptionSpec& spec) {
  check_profile(spec.profile);
  if (spec.overrides.params) {
    if (params_kind(*spec.overrides.params) != spec.kind) {
      throw ConfigError("parameter override for " +
                        std::string(kind_name(params_kind(*spec.overrides.params))) +
                        " does not match corruption " + std::string(kind_name(spec.kind)));
    }
    return *spec.overrides.params;
  }
  return lookup_params(spec.kind, spec.severity, spec.profile);
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::int64_t image_id,
                          CorruptionKind kind, Severity severity) {
  std::string key = std::to_string(global_seed);
  key += '/';
  key += std::to_string(image_id);
  key += '/';
  key += kind_name(kind);
  key += '/';
  key += std::to_string(severity.level());
  return hash_key(key);
}

RgbImage apply(const RgbImage& img, const CorruptionSpec& spec) {
  if (spec.kind == CorruptionKind::kMask) {
    throw UsageError("mask corruption requires keypoint targets");
  }
  return apply(img, spec, {});
}

RgbImage apply(const RgbImage& img, const CorruptionSpec& spec,
               std::span<const MaskTarget> targets) {
  const CorruptionParams params = resolve_params(spec);
  const std::uint64_t seed = derive_seed(spec.global_seed, spec.image_id, spec.kind, spec.severity);
  const double gain = spec.overrides.noise_gain.value_or(1.0);
  const std::uint8_t fill = spec.overrides.mask_fill.value_or(0);

  return std::visit(
      [&](const auto& p) -> RgbImage {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MotionBlurParams>) {
          return motion_blur(img, p.radius, p.sigma, seed);
        } else if constexpr (std::is_same_v<T, GaussianNoiseParams>) {
          return gaussian_noise(img, p.sigma, gain, seed);
        } else if constexpr (std::is_same_v<T, ImpulseNoiseParams>) {
          return impulse_noise(img, p.proportion_percent, seed);
        } else if constexpr (std::is_same_v<T, PixelateParams>) {
          return pixelate(img, p.ratio_percent);
        } else if constexpr (std::is_same_v<T, JpegParams>) {
          return jpeg_compress(img, p.quality);
        } else if constexpr (std::is_same_v<T, ColorQuantParams>) {
          return color_quant(img, p.bits);
        } else if constexpr (std::is_same_v<T, BrightnessParams>) {
          return brightness(img, p.delta_v);
        } else if constexpr (std::is_same_v<T, DarknessParams>) {
          return darkness(img, p.gamma);
        } else if constexpr (std::is_same_v<T, ContrastParams>) {
          return contrast(img, p.factor);
        } else {
          return keypoint_mask(img, targets, p.size, fill);
        }
      },
      params);
}

}  // namespace kpbench
