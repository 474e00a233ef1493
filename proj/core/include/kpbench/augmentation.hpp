#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpbench/image.hpp"
#include "kpbench/keypoint_data.hpp"
#include "kpbench/random.hpp"

namespace kpbench {

enum class AugmentationSetId : std::uint8_t { kA, kB, kC, kD };

char set_letter(AugmentationSetId id) noexcept;
// "A".."D", case-insensitive. Throws UsageError otherwise.
AugmentationSetId parse_augmentation_set(std::string_view name);
// Comma-separated list such as "A,B,C".
std::vector<AugmentationSetId> parse_augmentation_sets(std::string_view list);

// Every transform keeps the image geometry, so keypoints stay valid.
enum class TransformId : std::uint8_t {
  // A: blur and noise
  kBoxBlur,
  kMedianBlur,
  kGaussianBlur,
  kGaussianNoise,
  kIsoNoise,
  kMotionBlur,
  // B: compression and color
  kColorJitter,
  kJpegReencode,
  kRgbShift,
  kToGray,
  kPixelDropout,
  // C: lighting
  kHsvJitter,
  kBrightnessJitter,
  kContrastJitter,
  kGammaJitter,
  kShadowPolygon,
  // D: occlusion
  kXyMasking,
  kGridDropout,
  kCoarseDropout,
};

std::string_view transform_name(TransformId id) noexcept;
AugmentationSetId set_of(TransformId id) noexcept;
std::vector<TransformId> set_members(AugmentationSetId id);

struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const ParamRange&, const ParamRange&) = default;
};

// Sampling ranges for every transform parameter, keyed "<transform>.<param>"
// (e.g. "jpeg_reencode.quality"). Integer parameters are drawn inclusively.
struct AugmentationRanges {
  std::map<std::string, ParamRange> values;
  std::uint8_t fill = 0;  // value written by dropout / masking transforms

  static AugmentationRanges defaults();

  const ParamRange& at(const std::string& key) const;

  // {"fill": 0, "ranges": {"jpeg_reencode.quality": [30, 50], ...}}.
  // Unknown keys or lo > hi throw ConfigError.
  void apply_overrides(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

struct PipelineStep {
  TransformId transform;
  double probability;
};

struct AugmentationPipeline {
  std::vector<AugmentationSetId> sets;
  std::vector<PipelineStep> steps;
  AugmentationRanges ranges;
};

// Member transforms of each set, concatenated in A, B, C, D order. Throws
// UsageError for an empty or duplicate list, ConfigError for a probability
// outside [0, 1].
AugmentationPipeline build_pipeline(std::span<const AugmentationSetId> sets,
                                    const AugmentationRanges& ranges = AugmentationRanges::defaults(),
                                    double probability = 0.5);

// One transform with parameters drawn from `rng`.
RgbImage apply_transform(TransformId id, const RgbImage& img, const AugmentationRanges& ranges,
                         Rng& rng);

struct AugmentResult {
  RgbImage image;
  std::vector<TransformId> fired;
};

// Step i draws from its own stream hash_key("<seed>/<i>/<transform name>"):
// first the firing test, then the parameters.
AugmentResult apply_pipeline_traced(const AugmentationPipeline& pipeline, const RgbImage& img,
                                    std::uint64_t seed);
RgbImage apply_pipeline(const AugmentationPipeline& pipeline, const RgbImage& img,
                        std::uint64_t seed);

struct AugmentManifestRow {
  std::string source_path;
  std::string output_path;
  std::uint64_t seed = 0;
  std::vector<TransformId> transforms_fired;
};

struct AugmentManifest {
  std::vector<AugmentManifestRow> rows;

  // source_path,output_path,seed,transforms_fired ("a;b;c")
  std::string to_csv() const;
};

struct ExportOptions {
  int copies = 1;
  std::uint64_t global_seed = 0;
  int workers = 1;
};

// Writes out_root/images/<stem>_aug<k>.<ext>, out_root/annotations.json and
// out_root/manifest.csv. A copy where no transform fired keeps the source
// bytes and extension; every other copy is PNG. Image and annotation ids are
// renumbered from 1 in (source image, copy) order.
AugmentManifest export_augmented(const DatasetIndex& dataset,
                                 const std::filesystem::path& images_root,
                                 const AugmentationPipeline& pipeline,
                                 const std::filesystem::path& out_root,
                                 const ExportOptions& options);

// Per (image, copy) seed: hash_key("<global_seed>/<image_id>/<copy>").
std::uint64_t augmentation_seed(std::uint64_t global_seed, std::int64_t image_id, int copy);

}  // namespace kpbench
