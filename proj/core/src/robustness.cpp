#include "kpbench/robustness.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>

#include "kpbench/error.hpp"

namespace kpbench {
namespace {

class Mean {
 public:
  void add(const std::optional<double>& v) {
    if (v) {
      sum_ += *v;
      ++count_;
    }
  }
  std::optional<double> value() const {
    if (count_ == 0) return std::nullopt;
    return sum_ / static_cast<double>(count_);
  }

 private:
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

std::optional<double> ratio(const std::optional<double>& v, double denom) {
  if (!v) return std::nullopt;
  return *v / denom;
}

std::string group_title(CorruptionGroup g) {
  switch (g) {
    case CorruptionGroup::kBlurNoise: return "Blur&Noise";
    case CorruptionGroup::kCompressionColor: return "Compression&Color";
    case CorruptionGroup::kLighting: return "Lighting";
    case CorruptionGroup::kMask: return "Mask";
  }
  return "";
}

std::vector<std::string> summary_header() {
  std::vector<std::string> cols = {"Model", "Clean mAP", "Clean mAR", "Overall mAP",
                                   "Overall mAR", "Overall mRR"};
  for (auto g : kAllGroups) {
    const auto t = group_title(g);
    cols.push_back(t + " mAP");
    cols.push_back(t + " mAR");
    cols.push_back(t + " mRR");
  }
  return cols;
}

std::vector<std::string> summary_row(const RobustnessReport& r) {
  std::vector<std::string> row = {r.label.empty() ? "-" : r.label,
                                  format_percent(r.clean.map),
                                  format_percent(r.clean.mar),
                                  format_percent(r.overall_map),
                                  format_percent(r.overall_mar),
                                  format_percent(r.mrr)};
  for (const auto& g : r.groups) {
    row.push_back(format_percent(g.map));
    row.push_back(format_percent(g.mar));
    row.push_back(format_percent(g.mrr));
  }
  return row;
}

void markdown_row(std::ostringstream& out, const std::vector<std::string>& cells) {
  out << '|';
  for (const auto& c : cells) out << ' ' << c << " |";
  out << '\n';
}

void markdown_header(std::ostringstream& out, const std::vector<std::string>& cells) {
  markdown_row(out, cells);
  out << '|';
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i == 0 ? "---|" : "---:|");
  out << '\n';
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void csv_row(std::ostringstream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << csv_field(cells[i]);
  }
  out << '\n';
}

std::string snake(std::string s) {
  for (auto& c : s) {
    c = c == ' ' || c == '&' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

const std::vector<std::string> kCsvHeader = {"row",  "corruption", "severity", "mAP",  "AP50",
                                             "AP75", "AP_M",       "AP_L",     "mAR",  "AR50",
                                             "AR75", "AR_M",       "AR_L",     "RR"};

std::vector<std::string> metric_cells(const MetricSet& m) {
  return {format_percent(m.map), format_percent(m.ap50), format_percent(m.ap75),
          format_percent(m.ap_medium), format_percent(m.ap_large), format_percent(m.mar),
          format_percent(m.ar50), format_percent(m.ar75), format_percent(m.ar_medium),
          format_percent(m.ar_large)};
}

std::vector<std::string> sparse_row(std::string row, std::string corruption, std::string severity,
                                    const std::optional<double>& map,
                                    const std::optional<double>& mar,
                                    const std::optional<double>& rr) {
  std::vector<std::string> cells = {std::move(row), std::move(corruption), std::move(severity)};
  const std::string na = "NA";
  cells.push_back(format_percent(map));
  for (int i = 0; i < 4; ++i) cells.push_back(na);
  cells.push_back(format_percent(mar));
  for (int i = 0; i < 4; ++i) cells.push_back(na);
  cells.push_back(format_percent(rr));
  return cells;
}

}  // namespace

double relative_robustness(double clean_map, std::span<const double> severity_maps) {
  if (severity_maps.size() != 5) {
    throw UsageError("relative robustness needs 5 severity values, got " +
                     std::to_string(severity_maps.size()));
  }
  if (!(clean_map > 0.0)) throw DomainError("clean mAP must be > 0");
  double sum = 0.0;
  for (double v : severity_maps) sum += v;
  return sum / 5.0 / clean_map;
}

double mean_rr(std::span<const double> rr_values) {
  if (rr_values.size() != kAllCorruptions.size()) {
    throw UsageError("mRR needs 10 values (one per corruption), got " +
                     std::to_string(rr_values.size()));
  }
  double sum = 0.0;
  for (double v : rr_values) sum += v;
  return sum / static_cast<double>(rr_values.size());
}

RobustnessReport build_report(const CleanRecord& clean, std::span<const RunRecord> runs,
                              const ReportOptions& options) {
  if (!clean.metrics.map || !(*clean.metrics.map > 0.0)) {
    throw DomainError("clean mAP must be defined and > 0");
  }
  const double clean_map = *clean.metrics.map;

  std::map<std::pair<std::size_t, int>, const RunRecord*> cells;
  std::vector<std::string> issues;
  for (const auto& r : runs) {
    auto [it, inserted] = cells.emplace(std::pair{kind_index(r.corruption), r.severity.level()}, &r);
    if (!inserted) {
      issues.push_back("duplicate cell " + std::string(kind_name(r.corruption)) + "/" +
                       std::to_string(r.severity.level()));
    }
  }
  if (!options.allow_partial) {
    for (auto kind : kAllCorruptions) {
      for (int s = Severity::kMin; s <= Severity::kMax; ++s) {
        if (!cells.contains({kind_index(kind), s})) {
          issues.push_back("missing cell " + std::string(kind_name(kind)) + "/" +
                           std::to_string(s));
        }
      }
    }
  }
  if (!issues.empty()) throw ValidationError("invalid robustness grid:", std::move(issues));

  RobustnessReport report;
  report.label = options.label;
  report.clean = clean.metrics;
  for (const auto& [key, run] : cells) report.runs.push_back(*run);

  Mean overall_map;
  Mean overall_mar;
  Mean overall_rr;
  std::array<Mean, 5> per_severity;
  for (auto kind : kAllCorruptions) {
    CorruptionSummary c;
    c.kind = kind;
    Mean map;
    Mean mar;
    for (int s = Severity::kMin; s <= Severity::kMax; ++s) {
      auto it = cells.find({kind_index(kind), s});
      if (it == cells.end()) continue;
      const auto idx = static_cast<std::size_t>(s - 1);
      c.map[idx] = it->second->metrics.map;
      c.mar[idx] = it->second->metrics.mar;
      map.add(c.map[idx]);
      mar.add(c.mar[idx]);
      per_severity[idx].add(ratio(c.map[idx], clean_map));
    }
    c.mean_map = map.value();
    c.mean_mar = mar.value();
    c.rr = ratio(c.mean_map, clean_map);
    overall_map.add(c.mean_map);
    overall_mar.add(c.mean_mar);
    overall_rr.add(c.rr);
    report.corruptions.push_back(c);
  }
  report.overall_map = overall_map.value();
  report.overall_mar = overall_mar.value();
  report.mrr = overall_rr.value();
  for (std::size_t s = 0; s < 5; ++s) report.severity_mrr[s] = per_severity[s].value();

  for (auto g : kAllGroups) {
    Mean map;
    Mean mar;
    Mean rr;
    for (auto kind : group_members(g)) {
      const auto& c = report.corruptions[kind_index(kind)];
      map.add(c.mean_map);
      mar.add(c.mean_mar);
      rr.add(c.rr);
    }
    report.groups.push_back({g, map.value(), mar.value(), rr.value()});
  }
  return report;
}

ReportFormat parse_report_format(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "markdown" || lower == "md") return ReportFormat::kMarkdown;
  if (lower == "csv") return ReportFormat::kCsv;
  throw UsageError("unknown report format '" + std::string(name) + "' (valid: markdown, csv)");
}

std::string format_percent(const std::optional<double>& value) {
  if (!value) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", *value * 100.0);
  return buf;
}

std::string render(const RobustnessReport& report, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::kCsv) {
    csv_row(out, kCsvHeader);
    if (report.empty()) return out.str();
    auto clean = metric_cells(report.clean);
    clean.insert(clean.begin(), {"clean", "clean", "NA"});
    clean.push_back(format_percent(1.0));
    csv_row(out, clean);
    const double clean_map = *report.clean.map;
    auto run = report.runs.begin();
    for (auto kind : kAllCorruptions) {
      for (int s = Severity::kMin; s <= Severity::kMax; ++s) {
        const std::string name(kind_name(kind));
        if (run == report.runs.end() || run->corruption != kind || run->severity.level() != s) {
          csv_row(out, sparse_row("cell", name, std::to_string(s), std::nullopt, std::nullopt,
                                  std::nullopt));
          continue;
        }
        auto row = metric_cells(run->metrics);
        row.insert(row.begin(), {"cell", name, std::to_string(s)});
        row.push_back(format_percent(ratio(run->metrics.map, clean_map)));
        csv_row(out, row);
        ++run;
      }
    }
    for (const auto& c : report.corruptions) {
      csv_row(out, sparse_row("corruption", std::string(kind_name(c.kind)), "mean", c.mean_map,
                              c.mean_mar, c.rr));
    }
    for (const auto& g : report.groups) {
      csv_row(out, sparse_row("group", std::string(group_name(g.group)), "mean", g.map, g.mar,
                              g.mrr));
    }
    for (std::size_t s = 0; s < 5; ++s) {
      Mean map;
      Mean mar;
      for (const auto& c : report.corruptions) {
        map.add(c.map[s]);
        mar.add(c.mar[s]);
      }
      csv_row(out, sparse_row("severity", "all", std::to_string(s + 1), map.value(), mar.value(),
                              report.severity_mrr[s]));
    }
    csv_row(out, sparse_row("overall", "all", "mean", report.overall_map, report.overall_mar,
                            report.mrr));
    return out.str();
  }

  markdown_header(out, summary_header());
  if (report.empty()) return out.str();
  markdown_row(out, summary_row(report));

  out << '\n';
  std::vector<std::string> detail = {"Corruption"};
  for (int s = 1; s <= 5; ++s) detail.push_back("mAP s" + std::to_string(s));
  detail.insert(detail.end(), {"mAP", "mAR", "RR"});
  markdown_header(out, detail);
  for (const auto& c : report.corruptions) {
    std::vector<std::string> row = {std::string(kind_name(c.kind))};
    for (const auto& v : c.map) row.push_back(format_percent(v));
    row.insert(row.end(), {format_percent(c.mean_map), format_percent(c.mean_mar),
                           format_percent(c.rr)});
    markdown_row(out, row);
  }

  out << '\n';
  markdown_header(out, {"Severity", "mRR"});
  for (std::size_t s = 0; s < 5; ++s) {
    markdown_row(out, {std::to_string(s + 1), format_percent(report.severity_mrr[s])});
  }
  return out.str();
}

std::string render(std::span<const RobustnessReport> reports, ReportFormat format) {
  std::ostringstream out;
  const auto header = summary_header();
  if (format == ReportFormat::kCsv) {
    std::vector<std::string> cols;
    for (const auto& h : header) cols.push_back(snake(h));
    csv_row(out, cols);
  } else {
    markdown_header(out, header);
  }
  for (const auto& r : reports) {
    if (r.empty()) continue;
    if (format == ReportFormat::kCsv) {
      csv_row(out, summary_row(r));
    } else {
      markdown_row(out, summary_row(r));
    }
  }
  return out.str();
}

}  // namespace kpbench
