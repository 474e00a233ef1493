#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kpbench/augmentation.hpp"
#include "kpbench/corruption.hpp"
#include "kpbench/oks_eval.hpp"
#include "manifest.hpp"

namespace kpbench::cli {

namespace fs = std::filesystem;

struct CorruptOptions {
  fs::path annotations;
  fs::path images;
  fs::path out;
  DatasetProfile profile = DatasetProfile::kCoco;
  std::uint64_t seed = 0;
  std::vector<CorruptionKind> corruptions{kAllCorruptions.begin(), kAllCorruptions.end()};
  std::vector<int> severities{1, 2, 3, 4, 5};
  int workers = 1;
  bool force = false;
  bool resume = false;
  std::optional<double> noise_gain;
  std::optional<int> mask_fill;
  std::optional<fs::path> sigmas;
};

struct CorruptResult {
  RunManifest manifest;
  std::size_t reused = 0;             // rows taken over from a previous run (--resume)
  std::vector<std::string> failures;  // one entry per image that could not be processed
};

// Writes <out>/<corruption>/<severity>/<file_name> as PNG for every selected
// cell, plus <out>/manifest.csv. Rows are journaled to manifest.partial.csv
// while the run is in progress.
CorruptResult cmd_corrupt(const CorruptOptions& options, std::ostream& log);

struct EvaluateOptions {
  fs::path gt;
  fs::path predictions;
  std::optional<fs::path> out;
  std::optional<fs::path> sigmas;
  int workers = 1;
  int max_detections = 20;
  IgnorePolicy ignore_policy = IgnorePolicy::kIgnore;
  std::optional<double> unannotated_oks;
};

// Prints the metrics as JSON on `out` and writes them to options.out if set.
MetricSet cmd_evaluate(const EvaluateOptions& options, std::ostream& out);

struct ReportCommandOptions {
  fs::path clean;
  fs::path runs;  // holds <corruption>/<severity>.json
  std::string format = "markdown";
  std::optional<fs::path> out;  // prefix; writes <out>.md and <out>.csv
  bool allow_partial = false;
  std::string label;
};

std::string cmd_report(const ReportCommandOptions& options, std::ostream& out);

struct AugmentOptions {
  fs::path annotations;
  fs::path images;
  fs::path out;
  std::string sets;
  int copies = 1;
  std::uint64_t seed = 0;
  int workers = 1;
  double probability = 0.5;
  std::optional<fs::path> ranges;
  bool force = false;
};

AugmentManifest cmd_augment(const AugmentOptions& options, std::ostream& log);

}  // namespace kpbench::cli
