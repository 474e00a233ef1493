#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <tuple>

#include "kpbench/error.hpp"
#include "kpbench/image_io.hpp"
#include "kpbench/keypoint_data.hpp"
#include "kpbench/parallel.hpp"
#include "kpbench/robustness.hpp"

namespace kpbench::cli {
namespace {

using CellKey = std::tuple<std::int64_t, std::size_t, int>;

CellKey key_of(const ManifestRow& r) {
  return {r.source_id, kind_index(r.corruption), r.severity};
}

SigmaOverrides sigma_overrides(const std::optional<fs::path>& path) {
  return path ? load_sigmas_file(*path) : SigmaOverrides{};
}

std::vector<std::uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

void require_dir(const fs::path& dir, const char* what) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError(std::string(what) + " not found: " + dir.string());
}

// Append-only journal of finished rows, shared by all workers.
class Journal {
 public:
  Journal(const fs::path& path, bool append) {
    std::error_code ec;
    const bool fresh = !append || !fs::exists(path, ec);
    out_.open(path, append ? std::ios::app : std::ios::trunc);
    if (!out_) throw IoError("cannot write " + path.string());
    if (fresh) out_ << kManifestHeader << '\n' << std::flush;
  }

  void add(const ManifestRow& row) {
    std::lock_guard lock(mutex_);
    out_ << manifest_line(row) << '\n' << std::flush;
  }

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

std::map<CellKey, ManifestRow> previous_rows(const fs::path& out_root) {
  std::map<CellKey, ManifestRow> rows;
  for (const char* name : {"manifest.csv", "manifest.partial.csv"}) {
    const auto path = out_root / name;
    std::error_code ec;
    if (!fs::exists(path, ec)) continue;
    for (auto& r : RunManifest::read(path, true).rows) rows[key_of(r)] = r;
  }
  return rows;
}

}  // namespace

CorruptResult cmd_corrupt(const CorruptOptions& opt, std::ostream& log) {
  if (opt.workers < 1) throw UsageError("workers must be >= 1");
  if (opt.force && opt.resume) throw UsageError("--force and --resume are mutually exclusive");
  if (opt.corruptions.empty()) throw UsageError("no corruption selected");
  if (opt.severities.empty()) throw UsageError("no severity selected");
  std::vector<Severity> severities;
  for (int s : opt.severities) severities.emplace_back(s);
  if (opt.mask_fill && (*opt.mask_fill < 0 || *opt.mask_fill > 255)) {
    throw ConfigError("mask fill must be in [0, 255]");
  }
  if (opt.noise_gain && !(*opt.noise_gain > 0.0)) throw ConfigError("noise gain must be > 0");

  const auto index = load_annotations(opt.annotations, sigma_overrides(opt.sigmas));
  require_dir(opt.images, "images root");

  const auto& images = index.images();
  auto target = [&](const ImageRecord& rec, CorruptionKind kind, Severity sev) {
    return fs::path(std::string(kind_name(kind))) / std::to_string(sev.level()) / rec.file_name;
  };

  if (!opt.force && !opt.resume) {
    std::size_t existing = 0;
    std::string first;
    for (const auto& rec : images) {
      for (auto kind : opt.corruptions) {
        for (auto sev : severities) {
          std::error_code ec;
          if (fs::exists(opt.out / target(rec, kind, sev), ec)) {
            if (existing++ == 0) first = target(rec, kind, sev).generic_string();
          }
        }
      }
    }
    if (existing > 0) {
      throw UsageError(std::to_string(existing) + " output file(s) already exist (first: " + first +
                       "); pass --force to overwrite or --resume to continue");
    }
  }

  std::error_code ec;
  fs::create_directories(opt.out, ec);
  if (ec) throw IoError("cannot create " + opt.out.string() + ": " + ec.message());

  const auto previous = opt.resume ? previous_rows(opt.out) : std::map<CellKey, ManifestRow>{};
  Journal journal(opt.out / "manifest.partial.csv", opt.resume);

  std::vector<std::vector<ManifestRow>> rows(images.size());
  std::vector<std::string> failures(images.size());
  std::vector<std::size_t> reused(images.size(), 0);

  parallel_for(images.size(), opt.workers, [&](std::size_t i) {
    const auto& rec = images[i];
    try {
      std::optional<RgbImage> clean;
      std::optional<MaskTargetSet> targets;
      for (auto kind : opt.corruptions) {
        for (auto sev : severities) {
          const auto rel = target(rec, kind, sev);
          const auto seed = derive_seed(opt.seed, rec.id, kind, sev);
          if (auto it = previous.find({rec.id, kind_index(kind), sev.level()});
              it != previous.end() && it->second.seed == seed &&
              it->second.output_path == rel.generic_string()) {
            std::error_code exists_ec;
            if (fs::is_regular_file(opt.out / rel, exists_ec) &&
                sha256_file(opt.out / rel) == it->second.sha256) {
              rows[i].push_back(it->second);
              ++reused[i];
              continue;
            }
          }
          if (!clean) clean = read_image(opt.images / rec.file_name);
          CorruptionSpec spec;
          spec.kind = kind;
          spec.severity = sev;
          spec.global_seed = opt.seed;
          spec.profile = opt.profile;
          spec.image_id = rec.id;
          spec.overrides.noise_gain = opt.noise_gain;
          if (opt.mask_fill) spec.overrides.mask_fill = static_cast<std::uint8_t>(*opt.mask_fill);
          RgbImage corrupted = [&] {
            if (kind != CorruptionKind::kMask) return apply(*clean, spec);
            if (!targets) targets = mask_targets_for(index, rec.id);
            return apply(*clean, spec, *targets);
          }();
          const auto bytes = encode_png(corrupted);
          write_file_atomic(opt.out / rel, bytes);
          ManifestRow row{rec.id, kind, sev.level(), seed, rel.generic_string(), sha256_hex(bytes)};
          journal.add(row);
          rows[i].push_back(std::move(row));
        }
      }
    } catch (const std::exception& e) {
      failures[i] = "image " + std::to_string(rec.id) + " (" + rec.file_name + "): " + e.what();
    }
  });

  CorruptResult result;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (auto& r : rows[i]) result.manifest.rows.push_back(std::move(r));
    if (!failures[i].empty()) result.failures.push_back(failures[i]);
    result.reused += reused[i];
  }
  result.manifest.sort();
  write_file_atomic(opt.out / "manifest.csv", to_bytes(result.manifest.to_csv()));
  fs::remove(opt.out / "manifest.partial.csv", ec);

  log << "corrupt: " << result.manifest.rows.size() << " images written";
  if (result.reused > 0) log << " (" << result.reused << " reused)";
  log << ", " << result.failures.size() << " failed\n";
  return result;
}

MetricSet cmd_evaluate(const EvaluateOptions& opt, std::ostream& out) {
  const auto index = load_annotations(opt.gt, sigma_overrides(opt.sigmas));
  const auto preds = load_predictions(opt.predictions, index);
  EvalParams params;
  params.max_detections = opt.max_detections;
  params.ignore_policy = opt.ignore_policy;
  params.unannotated_oks = opt.unannotated_oks;
  const auto metrics = evaluate(index, preds, params, opt.workers);
  const auto text = metrics_to_json(metrics).dump(2) + "\n";
  out << text;
  if (opt.out) write_file_atomic(*opt.out, to_bytes(text));
  return metrics;
}

namespace {

MetricSet read_metrics(const fs::path& path) {
  const auto bytes = read_file(path);
  nlohmann::json doc = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (doc.is_discarded()) {
    throw ValidationError(std::vector<std::string>{path.string() + ": malformed JSON"});
  }
  try {
    return metrics_from_json(doc);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ":", e.issues());
  }
}

}  // namespace

std::string cmd_report(const ReportCommandOptions& opt, std::ostream& out) {
  const auto format = parse_report_format(opt.format);
  CleanRecord clean{read_metrics(opt.clean)};
  require_dir(opt.runs, "runs directory");
  std::vector<RunRecord> runs;
  for (auto kind : kAllCorruptions) {
    for (int s = Severity::kMin; s <= Severity::kMax; ++s) {
      const auto path = opt.runs / std::string(kind_name(kind)) / (std::to_string(s) + ".json");
      std::error_code ec;
      if (!fs::exists(path, ec)) continue;
      runs.push_back({kind, Severity(s), read_metrics(path)});
    }
  }
  ReportOptions ro;
  ro.allow_partial = opt.allow_partial;
  ro.label = opt.label;
  const auto report = build_report(clean, runs, ro);
  const auto text = render(report, format);
  out << text;
  if (opt.out) {
    auto md = *opt.out;
    md += ".md";
    auto csv = *opt.out;
    csv += ".csv";
    write_file_atomic(md, to_bytes(render(report, ReportFormat::kMarkdown)));
    write_file_atomic(csv, to_bytes(render(report, ReportFormat::kCsv)));
  }
  return text;
}

AugmentManifest cmd_augment(const AugmentOptions& opt, std::ostream& log) {
  if (opt.workers < 1) throw UsageError("workers must be >= 1");
  const auto sets = parse_augmentation_sets(opt.sets);
  auto ranges = AugmentationRanges::defaults();
  if (opt.ranges) {
    const auto bytes = read_file(*opt.ranges);
    auto doc = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (doc.is_discarded()) throw ConfigError(opt.ranges->string() + ": malformed JSON");
    ranges.apply_overrides(doc);
  }
  const auto pipeline = build_pipeline(sets, ranges, opt.probability);
  std::string names;
  for (const auto& step : pipeline.steps) {
    if (!names.empty()) names += ", ";
    names += transform_name(step.transform);
  }
  log << "augment: pipeline of " << pipeline.steps.size() << " transforms: " << names << "\n";

  std::error_code ec;
  if (!opt.force && fs::exists(opt.out / "manifest.csv", ec)) {
    throw UsageError("output already exists: " + (opt.out / "manifest.csv").string() +
                     "; pass --force to overwrite");
  }
  const auto index = load_annotations(opt.annotations);
  require_dir(opt.images, "images root");
  ExportOptions eo;
  eo.copies = opt.copies;
  eo.global_seed = opt.seed;
  eo.workers = opt.workers;
  auto manifest = export_augmented(index, opt.images, pipeline, opt.out, eo);
  log << "augment: " << manifest.rows.size() << " images written\n";
  return manifest;
}

}  // namespace kpbench::cli
