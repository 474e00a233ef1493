#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpbench/corruption.hpp"

namespace kpbench {

// COCO per-keypoint OKS constants for the 17-keypoint human skeleton.
inline constexpr std::array<double, 17> kCocoSigmas = {
    0.026, 0.025, 0.025, 0.035, 0.035, 0.079, 0.079, 0.072, 0.072,
    0.062, 0.062, 0.107, 0.107, 0.087, 0.087, 0.089, 0.089};

struct ImageRecord {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
};

struct Annotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  std::vector<double> keypoints;  // K triplets (x, y, v)
  int num_keypoints = 0;
  double area = 0.0;
  std::array<double, 4> bbox{};  // x, y, w, h
  bool iscrowd = false;

  std::size_t keypoint_count() const noexcept { return keypoints.size() / 3; }
  // Crowd regions and instances without labeled keypoints absorb detections
  // during evaluation instead of counting as true or false positives.
  bool is_ignore_region() const noexcept { return iscrowd || num_keypoints == 0; }
};

struct Prediction {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  std::vector<double> keypoints;  // K triplets (x, y, score)
  double score = 0.0;
};

struct CategoryMeta {
  std::int64_t id = 0;
  std::string name;
  std::vector<std::string> keypoint_names;
  std::vector<double> sigmas;

  std::size_t keypoint_count() const noexcept { return sigmas.size(); }
};

// Per-category OKS constants; key 0 is not special, use `default_sigmas` for a
// fallback that applies to every category without an explicit entry.
struct SigmaOverrides {
  std::vector<double> default_sigmas;
  std::map<std::int64_t, std::vector<double>> by_category;

  bool empty() const noexcept { return default_sigmas.empty() && by_category.empty(); }
};

// Validated, immutable view over a COCO keypoints ground-truth file.
class DatasetIndex {
 public:
  // Validates the document; throws ValidationError listing every problem.
  static DatasetIndex from_json(const nlohmann::json& doc, const SigmaOverrides& sigmas = {});

  const std::vector<ImageRecord>& images() const noexcept { return images_; }
  const std::vector<Annotation>& annotations() const noexcept { return annotations_; }
  const std::vector<CategoryMeta>& categories() const noexcept { return categories_; }

  const ImageRecord* find_image(std::int64_t id) const;
  const CategoryMeta* find_category(std::int64_t id) const;
  bool contains_image(std::int64_t id) const { return find_image(id) != nullptr; }

  // Positions in annotations() belonging to `image_id`, in file order. Empty
  // for unknown ids.
  std::span<const std::size_t> annotation_indices(std::int64_t image_id) const;

  // Evaluation-relevant fields only, in the COCO layout.
  nlohmann::json to_json() const;
  // The document the index was built from, including fields the index ignores.
  const nlohmann::json& source_document() const noexcept { return source_; }

 private:
  std::vector<ImageRecord> images_;
  std::vector<Annotation> annotations_;
  std::vector<CategoryMeta> categories_;
  std::unordered_map<std::int64_t, std::size_t> image_pos_;
  std::unordered_map<std::int64_t, std::size_t> category_pos_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> by_image_;
  nlohmann::json source_;
};

DatasetIndex load_annotations(const std::filesystem::path& path,
                              const SigmaOverrides& sigmas = {});

std::vector<Prediction> parse_predictions(const nlohmann::json& doc, const DatasetIndex& index);
std::vector<Prediction> load_predictions(const std::filesystem::path& path,
                                         const DatasetIndex& index);
nlohmann::json predictions_to_json(std::span<const Prediction> predictions);

// Sigma file: {"default": [...], "categories": {"<id>": [...]}}; both keys optional.
SigmaOverrides load_sigmas_file(const std::filesystem::path& path);

// All keypoints of the image's annotations, rounded half away from zero to
// pixel centres. Throws UsageError for an unknown image id.
MaskTargetSet mask_targets_for(const DatasetIndex& index, std::int64_t image_id);

}  // namespace kpbench
