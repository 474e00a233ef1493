#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpbench/image.hpp"

namespace kpbench::testing {

std::filesystem::path data_dir();

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

using CsvRow = std::map<std::string, std::string>;
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// 256x256 astronaut and 200x133 coffee photographs.
RgbImage astronaut();
RgbImage coffee();

// Smooth colour gradient with some texture, for synthetic datasets.
RgbImage synthetic_image(int width, int height, std::uint64_t seed);

// Random tiny COCO keypoint problem: 1-5 images, 0-4 gts and 0-6 predictions
// per image, one or two categories with five keypoints each. Crowd and
// unlabeled instances, score ties and area-range boundaries all occur.
struct TinyInstance {
  nlohmann::json gt;
  nlohmann::json predictions;
};
TinyInstance make_tiny_instance(std::uint64_t seed);

// A dataset of `count` synthetic PNG images with two annotated people each,
// written under `root`/images, ground truth at `root`/gt.json.
void write_synthetic_dataset(const std::filesystem::path& root, int count, std::uint64_t seed);

}  // namespace kpbench::testing
