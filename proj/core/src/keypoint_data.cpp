#include "kpbench/keypoint_data.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "kpbench/error.hpp"
#include "kpbench/image_io.hpp"

namespace kpbench {
namespace {

using nlohmann::json;

class Issues {
 public:
  void add(std::string message) { items_.push_back(std::move(message)); }
  bool empty() const { return items_.empty(); }
  void throw_if_any(const std::string& context) {
    if (!items_.empty()) throw ValidationError(context, std::move(items_));
  }

 private:
  std::vector<std::string> items_;
};

std::optional<std::int64_t> as_int(const json& value) {
  if (value.is_number_integer()) return value.get<std::int64_t>();
  if (value.is_number_float()) {
    const double d = value.get<double>();
    if (std::isfinite(d) && std::floor(d) == d) return static_cast<std::int64_t>(d);
  }
  return std::nullopt;
}

std::optional<double> as_real(const json& value) {
  if (value.is_number()) {
    const double d = value.get<double>();
    if (std::isfinite(d)) return d;
  }
  return std::nullopt;
}

std::optional<std::vector<double>> as_real_array(const json& value) {
  if (!value.is_array()) return std::nullopt;
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    auto d = as_real(v);
    if (!d) return std::nullopt;
    out.push_back(*d);
  }
  return out;
}

json parse_json_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("file not found: " + path.string());
  const auto bytes = read_file(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    std::string msg = "malformed JSON in " + path.string() + ": " + e.what();
    const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (text.find("NaN") != std::string_view::npos ||
        text.find("Infinity") != std::string_view::npos) {
      msg += " (non-finite numbers such as NaN are not accepted)";
    }
    throw ValidationError(std::vector<std::string>{msg});
  }
}

std::string record(const char* kind, const json& obj, std::size_t position) {
  if (obj.is_object() && obj.contains("id")) {
    if (auto id = as_int(obj["id"])) return std::string(kind) + " " + std::to_string(*id);
  }
  return std::string(kind) + " #" + std::to_string(position);
}

std::vector<double> resolve_sigmas(std::int64_t id, std::size_t name_count, const json& obj,
                                   const SigmaOverrides& overrides, const std::string& where,
                                   Issues& issues) {
  if (auto it = overrides.by_category.find(id); it != overrides.by_category.end()) {
    return it->second;
  }
  if (obj.contains("sigmas")) {
    if (auto s = as_real_array(obj["sigmas"])) return *s;
    issues.add(where + ": sigmas must be an array of numbers");
    return {};
  }
  if (!overrides.default_sigmas.empty()) return overrides.default_sigmas;
  if (name_count == kCocoSigmas.size() || name_count == 0) {
    return {kCocoSigmas.begin(), kCocoSigmas.end()};
  }
  issues.add(where + ": no OKS sigmas for " + std::to_string(name_count) +
             " keypoints (provide a sigmas file)");
  return {};
}

}  // namespace

DatasetIndex DatasetIndex::from_json(const nlohmann::json& doc, const SigmaOverrides& sigmas) {
  Issues issues;
  if (!doc.is_object()) {
    throw ValidationError(std::vector<std::string>{"ground truth must be a JSON object"});
  }
  for (const char* key : {"images", "annotations", "categories"}) {
    if (!doc.contains(key) || !doc[key].is_array()) {
      issues.add(std::string("missing top-level array '") + key + "'");
    }
  }
  issues.throw_if_any("invalid COCO keypoints file:");

  DatasetIndex index;
  index.source_ = doc;

  // Categories.
  std::size_t pos = 0;
  for (const auto& obj : doc["categories"]) {
    const std::string where = record("category", obj, pos++);
    if (!obj.is_object()) {
      issues.add(where + ": not an object");
      continue;
    }
    CategoryMeta cat;
    auto id = obj.contains("id") ? as_int(obj["id"]) : std::nullopt;
    if (!id) {
      issues.add(where + ": missing integer id");
      continue;
    }
    cat.id = *id;
    if (obj.contains("name") && obj["name"].is_string()) cat.name = obj["name"].get<std::string>();
    if (obj.contains("keypoints")) {
      if (!obj["keypoints"].is_array()) {
        issues.add(where + ": keypoints must be an array of names");
      } else {
        for (const auto& n : obj["keypoints"]) {
          cat.keypoint_names.push_back(n.is_string() ? n.get<std::string>() : n.dump());
        }
      }
    }
    cat.sigmas = resolve_sigmas(cat.id, cat.keypoint_names.size(), obj, sigmas, where, issues);
    if (!cat.keypoint_names.empty() && !cat.sigmas.empty() &&
        cat.sigmas.size() != cat.keypoint_names.size()) {
      issues.add(where + ": " + std::to_string(cat.sigmas.size()) + " sigmas for " +
                 std::to_string(cat.keypoint_names.size()) + " keypoints");
    }
    for (double s : cat.sigmas) {
      if (!(s > 0.0)) {
        issues.add(where + ": sigmas must be > 0");
        break;
      }
    }
    if (!index.category_pos_.emplace(cat.id, index.categories_.size()).second) {
      issues.add(where + ": duplicate category id");
      continue;
    }
    index.categories_.push_back(std::move(cat));
  }

  // Images.
  pos = 0;
  for (const auto& obj : doc["images"]) {
    const std::string where = record("image", obj, pos++);
    if (!obj.is_object()) {
      issues.add(where + ": not an object");
      continue;
    }
    ImageRecord img;
    auto id = obj.contains("id") ? as_int(obj["id"]) : std::nullopt;
    if (!id) {
      issues.add(where + ": missing integer id");
      continue;
    }
    img.id = *id;
    if (obj.contains("file_name") && obj["file_name"].is_string()) {
      img.file_name = obj["file_name"].get<std::string>();
    } else {
      issues.add(where + ": missing file_name");
    }
    const std::int64_t w = obj.contains("width") ? as_int(obj["width"]).value_or(0) : 0;
    const std::int64_t h = obj.contains("height") ? as_int(obj["height"]).value_or(0) : 0;
    if (w < 1 || h < 1) {
      issues.add(where + ": width and height must be integers >= 1");
    } else {
      img.width = static_cast<int>(w);
      img.height = static_cast<int>(h);
    }
    if (!index.image_pos_.emplace(img.id, index.images_.size()).second) {
      issues.add(where + ": duplicate image id");
      continue;
    }
    index.images_.push_back(std::move(img));
  }

  // Annotations.
  std::unordered_set<std::int64_t> ann_ids;
  pos = 0;
  for (const auto& obj : doc["annotations"]) {
    const std::string where = record("annotation", obj, pos++);
    if (!obj.is_object()) {
      issues.add(where + ": not an object");
      continue;
    }
    Annotation ann;
    auto id = obj.contains("id") ? as_int(obj["id"]) : std::nullopt;
    if (!id) {
      issues.add(where + ": missing integer id");
      continue;
    }
    ann.id = *id;
    if (!ann_ids.insert(ann.id).second) issues.add(where + ": duplicate annotation id");

    auto image_id = obj.contains("image_id") ? as_int(obj["image_id"]) : std::nullopt;
    if (!image_id) {
      issues.add(where + ": missing integer image_id");
    } else {
      ann.image_id = *image_id;
      if (!index.image_pos_.contains(ann.image_id)) {
        issues.add(where + ": image_id " + std::to_string(ann.image_id) + " not found");
      }
    }
    const CategoryMeta* cat = nullptr;
    auto category_id = obj.contains("category_id") ? as_int(obj["category_id"]) : std::nullopt;
    if (!category_id) {
      issues.add(where + ": missing integer category_id");
    } else {
      ann.category_id = *category_id;
      cat = index.find_category(ann.category_id);
      if (cat == nullptr) {
        issues.add(where + ": category_id " + std::to_string(ann.category_id) + " not found");
      }
    }

    auto kps = obj.contains("keypoints") ? as_real_array(obj["keypoints"]) : std::nullopt;
    if (!kps) {
      issues.add(where + ": keypoints must be an array of numbers");
    } else {
      ann.keypoints = std::move(*kps);
      if (cat != nullptr && ann.keypoints.size() != 3 * cat->keypoint_count()) {
        issues.add(where + ": keypoints has " + std::to_string(ann.keypoints.size()) +
                   " values, expected " + std::to_string(3 * cat->keypoint_count()) + " values");
      }
      if (ann.keypoints.size() % 3 != 0) {
        issues.add(where + ": keypoints length is not a multiple of 3");
      }
    }
    int labeled = 0;
    for (std::size_t i = 2; i < ann.keypoints.size(); i += 3) {
      const double v = ann.keypoints[i];
      if (v != 0.0 && v != 1.0 && v != 2.0) {
        issues.add(where + ": visibility flag " + std::to_string(v) + " not in {0,1,2}");
        break;
      }
      if (v > 0.0) ++labeled;
    }
    if (obj.contains("num_keypoints")) {
      auto n = as_int(obj["num_keypoints"]);
      if (!n) {
        issues.add(where + ": num_keypoints must be an integer");
      } else if (*n != labeled) {
        issues.add(where + ": num_keypoints " + std::to_string(*n) + " but " +
                   std::to_string(labeled) + " keypoints have v > 0");
      }
    }
    ann.num_keypoints = labeled;

    if (obj.contains("iscrowd")) {
      const auto& c = obj["iscrowd"];
      if (c.is_boolean()) {
        ann.iscrowd = c.get<bool>();
      } else if (auto ci = as_int(c); ci && (*ci == 0 || *ci == 1)) {
        ann.iscrowd = *ci == 1;
      } else {
        issues.add(where + ": iscrowd must be 0 or 1");
      }
    }
    if (obj.contains("bbox")) {
      auto box = as_real_array(obj["bbox"]);
      if (!box || box->size() != 4) {
        issues.add(where + ": bbox must hold 4 numbers");
      } else {
        std::copy(box->begin(), box->end(), ann.bbox.begin());
      }
    }
    if (obj.contains("area")) {
      auto area = as_real(obj["area"]);
      if (!area) {
        issues.add(where + ": area must be a finite number");
      } else {
        ann.area = *area;
      }
    }
    if (!ann.is_ignore_region() && !(ann.area > 0.0)) {
      issues.add(where + ": area must be > 0 for an evaluated instance");
    }
    index.annotations_.push_back(std::move(ann));
  }

  issues.throw_if_any("invalid COCO keypoints file:");

  for (std::size_t i = 0; i < index.annotations_.size(); ++i) {
    index.by_image_[index.annotations_[i].image_id].push_back(i);
  }
  return index;
}

const ImageRecord* DatasetIndex::find_image(std::int64_t id) const {
  auto it = image_pos_.find(id);
  return it == image_pos_.end() ? nullptr : &images_[it->second];
}

const CategoryMeta* DatasetIndex::find_category(std::int64_t id) const {
  auto it = category_pos_.find(id);
  return it == category_pos_.end() ? nullptr : &categories_[it->second];
}

std::span<const std::size_t> DatasetIndex::annotation_indices(std::int64_t image_id) const {
  auto it = by_image_.find(image_id);
  if (it == by_image_.end()) return {};
  return it->second;
}

nlohmann::json DatasetIndex::to_json() const {
  json images = json::array();
  for (const auto& img : images_) {
    images.push_back({{"id", img.id},
                      {"file_name", img.file_name},
                      {"width", img.width},
                      {"height", img.height}});
  }
  json anns = json::array();
  for (const auto& a : annotations_) {
    anns.push_back({{"id", a.id},
                    {"image_id", a.image_id},
                    {"category_id", a.category_id},
                    {"keypoints", a.keypoints},
                    {"num_keypoints", a.num_keypoints},
                    {"area", a.area},
                    {"bbox", a.bbox},
                    {"iscrowd", a.iscrowd ? 1 : 0}});
  }
  json cats = json::array();
  for (const auto& c : categories_) {
    cats.push_back({{"id", c.id},
                    {"name", c.name},
                    {"keypoints", c.keypoint_names},
                    {"sigmas", c.sigmas}});
  }
  return {{"images", images}, {"annotations", anns}, {"categories", cats}};
}

DatasetIndex load_annotations(const std::filesystem::path& path, const SigmaOverrides& sigmas) {
  const json doc = parse_json_file(path);
  return DatasetIndex::from_json(doc, sigmas);
}

std::vector<Prediction> parse_predictions(const nlohmann::json& doc, const DatasetIndex& index) {
  if (!doc.is_array()) {
    throw ValidationError(std::vector<std::string>{"predictions must be a JSON array"});
  }
  Issues issues;
  std::vector<Prediction> out;
  out.reserve(doc.size());
  std::size_t pos = 0;
  for (const auto& obj : doc) {
    const std::string where = "prediction #" + std::to_string(pos++);
    if (!obj.is_object()) {
      issues.add(where + ": not an object");
      continue;
    }
    Prediction p;
    bool ok = true;
    auto image_id = obj.contains("image_id") ? as_int(obj["image_id"]) : std::nullopt;
    if (!image_id) {
      issues.add(where + ": missing integer image_id");
      ok = false;
    } else if (!index.contains_image(*image_id)) {
      issues.add(where + ": unknown image_id " + std::to_string(*image_id));
      ok = false;
    } else {
      p.image_id = *image_id;
    }
    const CategoryMeta* cat = nullptr;
    auto category_id = obj.contains("category_id") ? as_int(obj["category_id"]) : std::nullopt;
    if (!category_id) {
      issues.add(where + ": missing integer category_id");
      ok = false;
    } else if ((cat = index.find_category(*category_id)) == nullptr) {
      issues.add(where + ": unknown category_id " + std::to_string(*category_id));
      ok = false;
    } else {
      p.category_id = *category_id;
    }
    auto kps = obj.contains("keypoints") ? as_real_array(obj["keypoints"]) : std::nullopt;
    if (!kps) {
      issues.add(where + ": keypoints must be an array of finite numbers");
      ok = false;
    } else if (cat != nullptr && kps->size() != 3 * cat->keypoint_count()) {
      issues.add(where + ": keypoints has " + std::to_string(kps->size()) +
                 " values, expected " + std::to_string(3 * cat->keypoint_count()) + " values");
      ok = false;
    } else {
      p.keypoints = std::move(*kps);
    }
    auto score = obj.contains("score") ? as_real(obj["score"]) : std::nullopt;
    if (!score) {
      issues.add(where + ": score must be a finite number");
      ok = false;
    } else {
      p.score = *score;
    }
    if (ok) out.push_back(std::move(p));
  }
  issues.throw_if_any("invalid predictions:");
  return out;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path,
                                         const DatasetIndex& index) {
  return parse_predictions(parse_json_file(path), index);
}

nlohmann::json predictions_to_json(std::span<const Prediction> predictions) {
  json out = json::array();
  for (const auto& p : predictions) {
    out.push_back({{"image_id", p.image_id},
                   {"category_id", p.category_id},
                   {"keypoints", p.keypoints},
                   {"score", p.score}});
  }
  return out;
}

SigmaOverrides load_sigmas_file(const std::filesystem::path& path) {
  const json doc = parse_json_file(path);
  Issues issues;
  SigmaOverrides out;
  if (!doc.is_object()) {
    throw ValidationError(std::vector<std::string>{path.string() + ": expected a JSON object"});
  }
  auto check = [&](const std::vector<double>& s, const std::string& where) {
    if (s.empty()) issues.add(where + ": empty sigma list");
    for (double v : s) {
      if (!(v > 0.0)) {
        issues.add(where + ": sigmas must be > 0");
        break;
      }
    }
  };
  if (doc.contains("default")) {
    if (auto s = as_real_array(doc["default"])) {
      check(*s, "default");
      out.default_sigmas = std::move(*s);
    } else {
      issues.add("default: expected an array of numbers");
    }
  }
  if (doc.contains("categories")) {
    if (!doc["categories"].is_object()) {
      issues.add("categories: expected an object keyed by category id");
    } else {
      for (const auto& [key, value] : doc["categories"].items()) {
        std::int64_t id = 0;
        try {
          std::size_t used = 0;
          id = std::stoll(key, &used);
          if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
          issues.add("categories: key '" + key + "' is not an integer id");
          continue;
        }
        if (auto s = as_real_array(value)) {
          check(*s, "category " + key);
          out.by_category[id] = std::move(*s);
        } else {
          issues.add("category " + key + ": expected an array of numbers");
        }
      }
    }
  }
  issues.throw_if_any(path.string() + ":");
  return out;
}

MaskTargetSet mask_targets_for(const DatasetIndex& index, std::int64_t image_id) {
  if (!index.contains_image(image_id)) {
    throw UsageError("unknown image id " + std::to_string(image_id));
  }
  MaskTargetSet out;
  for (std::size_t i : index.annotation_indices(image_id)) {
    const auto& kps = index.annotations()[i].keypoints;
    for (std::size_t k = 0; k + 2 < kps.size(); k += 3) {
      out.push_back({static_cast<int>(std::round(kps[k])), static_cast<int>(std::round(kps[k + 1])),
                     static_cast<int>(kps[k + 2])});
    }
  }
  return out;
}

}  // namespace kpbench
