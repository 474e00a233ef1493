#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kpbench/corruption.hpp"
#include "kpbench/oks_eval.hpp"

namespace kpbench {

struct RunRecord {
  CorruptionKind corruption = CorruptionKind::kMotionBlur;
  Severity severity{1};
  MetricSet metrics;
};

struct CleanRecord {
  MetricSet metrics;
};

// mean_s(severity_maps[s]) / clean_map. Throws DomainError when clean_map <= 0
// and UsageError unless exactly five values are given.
double relative_robustness(double clean_map, std::span<const double> severity_maps);

// Arithmetic mean of exactly ten RR values (UsageError otherwise).
double mean_rr(std::span<const double> rr_values);

struct CorruptionSummary {
  CorruptionKind kind = CorruptionKind::kMotionBlur;
  std::array<std::optional<double>, 5> map{};  // by severity index
  std::array<std::optional<double>, 5> mar{};
  std::optional<double> mean_map;
  std::optional<double> mean_mar;
  std::optional<double> rr;
};

struct GroupSummary {
  CorruptionGroup group = CorruptionGroup::kBlurNoise;
  std::optional<double> map;
  std::optional<double> mar;
  std::optional<double> mrr;
};

// All values are fractions (0.7285, not 72.85). Missing or undefined cells are
// excluded from every mean.
struct RobustnessReport {
  std::string label;
  MetricSet clean;
  std::vector<CorruptionSummary> corruptions;  // empty, or one per kind in kind order
  std::vector<GroupSummary> groups;            // empty, or one per group
  std::optional<double> overall_map;
  std::optional<double> overall_mar;
  std::optional<double> mrr;
  std::array<std::optional<double>, 5> severity_mrr{};
  std::vector<RunRecord> runs;  // sorted by (corruption, severity)

  bool empty() const noexcept { return corruptions.empty(); }
};

struct ReportOptions {
  // Accept grids with missing cells; otherwise all 50 cells are required.
  bool allow_partial = false;
  std::string label;
};

// Throws ValidationError on duplicate cells or (strict mode) missing cells, and
// DomainError when the clean mAP is undefined or not positive.
RobustnessReport build_report(const CleanRecord& clean, std::span<const RunRecord> runs,
                              const ReportOptions& options = {});

enum class ReportFormat { kMarkdown, kCsv };

// Throws UsageError for anything other than "markdown"/"md" or "csv".
ReportFormat parse_report_format(std::string_view name);

// Summary table, then per-corruption and per-severity detail for one report.
std::string render(const RobustnessReport& report, ReportFormat format);
// One summary row per report.
std::string render(std::span<const RobustnessReport> reports, ReportFormat format);

// Two decimals of value * 100, or "NA".
std::string format_percent(const std::optional<double>& value);

}  // namespace kpbench
