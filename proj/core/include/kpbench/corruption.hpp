#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kpbench/image.hpp"

namespace kpbench {

// The ten corruption types, in benchmark column order.
enum class CorruptionKind : std::uint8_t {
  kMotionBlur,
  kGaussianNoise,
  kImpulseNoise,
  kPixelate,
  kJpegCompression,
  kColorQuant,
  kBrightness,
  kDarkness,
  kContrast,
  kMask,
};

inline constexpr std::array<CorruptionKind, 10> kAllCorruptions = {
    CorruptionKind::kMotionBlur,      CorruptionKind::kGaussianNoise,
    CorruptionKind::kImpulseNoise,    CorruptionKind::kPixelate,
    CorruptionKind::kJpegCompression, CorruptionKind::kColorQuant,
    CorruptionKind::kBrightness,      CorruptionKind::kDarkness,
    CorruptionKind::kContrast,        CorruptionKind::kMask,
};

enum class CorruptionGroup : std::uint8_t {
  kBlurNoise,
  kCompressionColor,
  kLighting,
  kMask,
};

inline constexpr std::array<CorruptionGroup, 4> kAllGroups = {
    CorruptionGroup::kBlurNoise, CorruptionGroup::kCompressionColor,
    CorruptionGroup::kLighting, CorruptionGroup::kMask};

// Snake-case name, also used for output directories ("motion_blur", ...).
std::string_view kind_name(CorruptionKind kind) noexcept;
// Case-insensitive; accepts '-' for '_'. Throws UsageError listing the valid names.
CorruptionKind parse_corruption_kind(std::string_view name);
std::size_t kind_index(CorruptionKind kind) noexcept;

CorruptionGroup group_of(CorruptionKind kind) noexcept;
std::string_view group_name(CorruptionGroup group) noexcept;
std::vector<CorruptionKind> group_members(CorruptionGroup group);

class Severity {
 public:
  static constexpr int kMin = 1;
  static constexpr int kMax = 5;

  // Throws DomainError outside [1, 5].
  explicit Severity(int level);

  int level() const noexcept { return level_; }
  std::size_t index() const noexcept { return static_cast<std::size_t>(level_ - 1); }

  friend auto operator<=>(const Severity&, const Severity&) = default;

 private:
  int level_;
};

enum class DatasetProfile : std::uint8_t { kCoco, kOcHuman, kAp10k };

std::string_view profile_name(DatasetProfile profile) noexcept;
// Accepts coco, ochuman, ap10k (case-insensitive, optional "-c" suffix).
// Throws ConfigError otherwise.
DatasetProfile parse_dataset_profile(std::string_view name);

struct MotionBlurParams {
  int radius;
  double sigma;
  friend bool operator==(const MotionBlurParams&, const MotionBlurParams&) = default;
};
struct GaussianNoiseParams {
  double sigma;
  friend bool operator==(const GaussianNoiseParams&, const GaussianNoiseParams&) = default;
};
struct ImpulseNoiseParams {
  double proportion_percent;
  friend bool operator==(const ImpulseNoiseParams&, const ImpulseNoiseParams&) = default;
};
struct PixelateParams {
  double ratio_percent;
  friend bool operator==(const PixelateParams&, const PixelateParams&) = default;
};
struct JpegParams {
  int quality;
  friend bool operator==(const JpegParams&, const JpegParams&) = default;
};
struct ColorQuantParams {
  int bits;
  friend bool operator==(const ColorQuantParams&, const ColorQuantParams&) = default;
};
struct BrightnessParams {
  double delta_v;
  friend bool operator==(const BrightnessParams&, const BrightnessParams&) = default;
};
struct DarknessParams {
  double gamma;
  friend bool operator==(const DarknessParams&, const DarknessParams&) = default;
};
struct ContrastParams {
  double factor;
  friend bool operator==(const ContrastParams&, const ContrastParams&) = default;
};
struct MaskParams {
  int size;
  friend bool operator==(const MaskParams&, const MaskParams&) = default;
};

using CorruptionParams =
    std::variant<MotionBlurParams, GaussianNoiseParams, ImpulseNoiseParams,
                 PixelateParams, JpegParams, ColorQuantParams, BrightnessParams,
                 DarknessParams, ContrastParams, MaskParams>;

// The kind a parameter tuple belongs to (variant alternatives follow kind order).
CorruptionKind params_kind(const CorruptionParams& params) noexcept;

// Exact severity table entry. Mask size depends on the dataset profile; every
// other kind ignores it.
CorruptionParams lookup_params(CorruptionKind kind, Severity severity,
                               DatasetProfile profile = DatasetProfile::kCoco);

// Human-readable rendering, e.g. "radius=10 sigma=3".
std::string describe(const CorruptionParams& params);

// One keypoint in pixel coordinates; may lie outside the image.
struct MaskTarget {
  int x;
  int y;
  int v;  // visibility: 0 unlabeled, 1 occluded, 2 visible
  friend bool operator==(const MaskTarget&, const MaskTarget&) = default;
};
using MaskTargetSet = std::vector<MaskTarget>;

struct CorruptionOverrides {
  std::optional<double> noise_gain;        // GaussianNoise sigma multiplier, default 1
  std::optional<std::uint8_t> mask_fill;   // Mask fill value, default 0
  std::optional<CorruptionParams> params;  // replaces the table entry; kind must match
};

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::kMotionBlur;
  Severity severity{1};
  std::uint64_t global_seed = 0;
  DatasetProfile profile = DatasetProfile::kCoco;
  std::int64_t image_id = 0;
  CorruptionOverrides overrides;
};

// Table entry after overrides and dataset profile are applied.
CorruptionParams resolve_params(const CorruptionSpec& spec);

// splitmix64(fnv1a64("<global_seed>/<image_id>/<kind-name>/<severity>")).
std::uint64_t derive_seed(std::uint64_t global_seed, std::int64_t image_id,
                          CorruptionKind kind, Severity severity);

// --- Operators. All are pure and preserve the image shape. ---

// Line kernel of 2*radius+1 taps, Gaussian-weighted (std `sigma`), oriented at
// an angle uniform in [-45, 45] degrees drawn from `seed`. Replicate border.
RgbImage motion_blur(const RgbImage& img, int radius, double sigma, std::uint64_t seed);
double motion_blur_angle_degrees(std::uint64_t seed);

// Adds N(0, (gain*sigma)^2) per sample in 8-bit units, then rounds and clips.
RgbImage gaussian_noise(const RgbImage& img, double sigma, double gain, std::uint64_t seed);

// Number of pixels impulse noise replaces: floor(proportion/100 * pixels).
std::size_t impulse_count(std::size_t pixel_count, double proportion_percent);
// Distinct pixel indices chosen without replacement (partial Fisher-Yates),
// in selection order.
std::vector<std::size_t> select_impulse_positions(std::size_t pixel_count,
                                                  std::size_t count, std::uint64_t seed);
RgbImage impulse_noise(const RgbImage& img, double proportion_percent, std::uint64_t seed);

// Box-average downscale to ceil(size * ratio/100), nearest-neighbour upscale back.
RgbImage pixelate(const RgbImage& img, double ratio_percent);

RgbImage jpeg_compress(const RgbImage& img, int quality);

RgbImage color_quant(const RgbImage& img, int bits);

RgbImage brightness(const RgbImage& img, double delta_v);

// Linear scaling: out = round(gamma * in).
RgbImage darkness(const RgbImage& img, double gamma);

// out = round((in - mean_c) * factor + mean_c), per-channel image mean.
RgbImage contrast(const RgbImage& img, double factor);

// Square of side `size` around each target with v > 0, clipped to the image.
RgbImage keypoint_mask(const RgbImage& img, std::span<const MaskTarget> targets,
                       int size, std::uint8_t fill = 0);

// Resolves parameters, derives the per-image seed and dispatches.
// Throws UsageError for Mask (use the overload with targets).
RgbImage apply(const RgbImage& img, const CorruptionSpec& spec);
RgbImage apply(const RgbImage& img, const CorruptionSpec& spec,
               std::span<const MaskTarget> targets);

}  // namespace kpbench
