#include <string>
#include <vector>

#include "kpbench/augmentation.hpp"
#include "kpbench/error.hpp"
#include "kpbench/image_io.hpp"
#include "kpbench/parallel.hpp"

namespace kpbench {
namespace {

std::vector<std::uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

std::string generic(const std::filesystem::path& p) { return p.generic_string(); }

}  // namespace

AugmentManifest export_augmented(const DatasetIndex& dataset,
                                 const std::filesystem::path& images_root,
                                 const AugmentationPipeline& pipeline,
                                 const std::filesystem::path& out_root,
                                 const ExportOptions& options) {
  if (options.copies < 1) throw UsageError("copies must be >= 1");
  if (options.workers < 1) throw UsageError("workers must be >= 1");

  const auto& images = dataset.images();
  const auto copies = static_cast<std::size_t>(options.copies);
  std::vector<AugmentManifestRow> rows(images.size() * copies);
  std::vector<std::string> out_names(rows.size());

  parallel_for(images.size(), options.workers, [&](std::size_t i) {
    const auto& rec = images[i];
    const auto source = images_root / rec.file_name;
    const auto bytes = read_file(source);
    const RgbImage clean = decode_image(bytes);
    const std::filesystem::path rel(rec.file_name);
    for (std::size_t k = 0; k < copies; ++k) {
      const auto seed = augmentation_seed(options.global_seed, rec.id, static_cast<int>(k));
      auto result = apply_pipeline_traced(pipeline, clean, seed);
      const bool untouched = result.fired.empty();
      auto name = rel.parent_path() /
                  (rel.stem().string() + "_aug" + std::to_string(k) +
                   (untouched ? rel.extension().string() : std::string(".png")));
      const auto out_path = out_root / "images" / name;
      if (untouched) {
        write_file_atomic(out_path, bytes);
      } else {
        write_png(out_path, result.image);
      }
      const auto slot = i * copies + k;
      out_names[slot] = generic(std::filesystem::path("images") / name);
      rows[slot] = {generic(source), generic(out_path), seed, std::move(result.fired)};
    }
  });

  // Annotations: the source document with images and annotations duplicated
  // per copy under fresh ids.
  const auto& doc = dataset.source_document();
  nlohmann::json out_doc = doc;
  nlohmann::json out_images = nlohmann::json::array();
  nlohmann::json out_anns = nlohmann::json::array();
  std::int64_t next_ann_id = 1;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (std::size_t k = 0; k < copies; ++k) {
      const auto new_id = static_cast<std::int64_t>(i * copies + k + 1);
      nlohmann::json img = doc["images"][i];
      img["id"] = new_id;
      img["file_name"] = out_names[i * copies + k];
      out_images.push_back(std::move(img));
      for (std::size_t a : dataset.annotation_indices(images[i].id)) {
        nlohmann::json ann = doc["annotations"][a];
        ann["id"] = next_ann_id++;
        ann["image_id"] = new_id;
        out_anns.push_back(std::move(ann));
      }
    }
  }
  out_doc["images"] = std::move(out_images);
  out_doc["annotations"] = std::move(out_anns);
  write_file_atomic(out_root / "annotations.json", to_bytes(out_doc.dump(2) + "\n"));

  AugmentManifest manifest{std::move(rows)};
  write_file_atomic(out_root / "manifest.csv", to_bytes(manifest.to_csv()));
  return manifest;
}

}  // namespace kpbench
