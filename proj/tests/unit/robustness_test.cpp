#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "kpbench/error.hpp"
#include "kpbench/random.hpp"
#include "kpbench/robustness.hpp"
#include "test_support.hpp"

namespace kpbench {
namespace {

MetricSet with_map(double map) {
  MetricSet m;
  m.map = map;
  m.mar = map;
  return m;
}

std::vector<RunRecord> grid(const std::function<double(CorruptionKind, int)>& value) {
  std::vector<RunRecord> runs;
  for (auto kind : kAllCorruptions) {
    for (int s = 1; s <= 5; ++s) runs.push_back({kind, Severity(s), with_map(value(kind, s))});
  }
  return runs;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(RelativeRobustness, Examples) {
  const double brightness[] = {0.7655, 0.7655, 0.7655, 0.7655, 0.7655};
  EXPECT_NEAR(relative_robustness(0.7884, brightness) * 100, 97.09, 0.05);
  const double same[] = {0.6, 0.6, 0.6, 0.6, 0.6};
  EXPECT_DOUBLE_EQ(relative_robustness(0.6, same), 1.0);
  const double zeros[] = {0, 0, 0, 0, 0};
  EXPECT_EQ(relative_robustness(0.6, zeros), 0.0);
  EXPECT_THROW(relative_robustness(0.0, same), DomainError);
  EXPECT_THROW(relative_robustness(-1.0, same), DomainError);
  const double four[] = {0.1, 0.2, 0.3, 0.4};
  EXPECT_THROW(relative_robustness(0.5, four), UsageError);
  const double better[] = {0.9, 0.9, 0.9, 0.9, 0.9};
  EXPECT_GT(relative_robustness(0.6, better), 1.0);
}

TEST(MeanRr, Examples) {
  std::vector<double> ones(10, 1.0);
  EXPECT_DOUBLE_EQ(mean_rr(ones), 1.0);
  std::vector<double> res50(10, 0.5232 / 0.7182);
  EXPECT_NEAR(mean_rr(res50) * 100, 72.84, 0.05);
  std::vector<double> vith(10, 0.6502 / 0.7884);
  EXPECT_NEAR(mean_rr(vith) * 100, 82.46, 0.05);
  EXPECT_THROW(mean_rr(std::vector<double>(9, 1.0)), UsageError);
}

TEST(BuildReport, UniformGridIsFullyRobust) {
  const auto report = build_report({with_map(0.7)}, grid([](auto, int) { return 0.7; }));
  EXPECT_DOUBLE_EQ(*report.mrr, 1.0);
  for (const auto& c : report.corruptions) EXPECT_DOUBLE_EQ(*c.rr, 1.0);
  for (const auto& g : report.groups) {
    EXPECT_DOUBLE_EQ(*g.map, 0.7);
    EXPECT_DOUBLE_EQ(*g.mrr, 1.0);
  }
  for (const auto& s : report.severity_mrr) EXPECT_DOUBLE_EQ(*s, 1.0);
}

TEST(BuildReport, MaskGroupArithmetic) {
  const auto report = build_report({with_map(0.8)}, grid([](CorruptionKind k, int) {
                                     return k == CorruptionKind::kMask ? 0.72 : 0.4;
                                   }));
  EXPECT_NEAR(*report.groups[3].mrr, 0.9, 1e-12);
  EXPECT_NEAR(*report.groups[0].mrr, 0.5, 1e-12);
  EXPECT_NEAR(*report.mrr, 0.54, 1e-12);
}

TEST(BuildReport, GridErrors) {
  auto runs = grid([](auto, int) { return 0.5; });
  runs.push_back(runs.front());
  try {
    build_report({with_map(0.7)}, runs);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate cell motion_blur/1"), std::string::npos);
  }
  runs = grid([](auto, int) { return 0.5; });
  runs.pop_back();
  EXPECT_THROW(build_report({with_map(0.7)}, runs), ValidationError);
  ReportOptions partial;
  partial.allow_partial = true;
  const auto report = build_report({with_map(0.7)}, runs, partial);
  EXPECT_FALSE(report.corruptions.back().map[4].has_value());
  EXPECT_NEAR(*report.corruptions.back().rr, 0.5 / 0.7, 1e-12);

  EXPECT_THROW(build_report({with_map(0.0)}, grid([](auto, int) { return 0.5; })), DomainError);
  EXPECT_THROW(build_report({MetricSet{}}, grid([](auto, int) { return 0.5; })), DomainError);
}

TEST(BuildReport, PublishedPerCorruptionTables) {
  const auto rows = testing::read_csv(testing::data_dir() / "coco_c_per_corruption.csv");
  std::map<std::string, testing::CsvRow> maps;
  std::map<std::string, testing::CsvRow> mars;
  for (const auto& r : rows) {
    if (r.at("table") == "map") maps[r.at("backbone") + r.at("method")] = r;
    if (r.at("table") == "mar") mars[r.at("backbone") + r.at("method")] = r;
  }
  ASSERT_EQ(maps.size(), 46u);
  int checked = 0;
  for (const auto& r : rows) {
    if (r.at("table") != "rr") continue;
    const auto& m = maps.at(r.at("backbone") + r.at("method"));
    const auto& ar = mars.at(r.at("backbone") + r.at("method"));
    MetricSet clean;
    clean.map = std::stod(m.at("clean")) / 100;
    clean.mar = std::stod(ar.at("clean")) / 100;
    std::vector<RunRecord> runs;
    for (auto kind : kAllCorruptions) {
      MetricSet cell;
      cell.map = std::stod(m.at(std::string(kind_name(kind)))) / 100;
      cell.mar = std::stod(ar.at(std::string(kind_name(kind)))) / 100;
      for (int s = 1; s <= 5; ++s) runs.push_back({kind, Severity(s), cell});
    }
    const auto report = build_report({clean}, runs);
    for (const auto& c : report.corruptions) {
      EXPECT_NEAR(*c.rr * 100, std::stod(r.at(std::string(kind_name(c.kind)))), 0.05)
          << r.at("backbone") << " " << kind_name(c.kind);
    }
    EXPECT_NEAR(*report.overall_map * 100, std::stod(m.at("overall")), 0.05) << r.at("backbone");
    ++checked;
  }
  EXPECT_EQ(checked, 46);
}

TEST(BuildReport, VitHSpotValues) {
  const auto rows = testing::read_csv(testing::data_dir() / "coco_c_per_corruption.csv");
  for (const auto& r : rows) {
    if (r.at("table") != "rr" || r.at("backbone") != "ViT-H") continue;
    EXPECT_NEAR(std::stod(r.at("motion_blur")), 58.89, 1e-9);
    EXPECT_NEAR(std::stod(r.at("gaussian_noise")), 82.08, 1e-9);
    EXPECT_NEAR(std::stod(r.at("mask")), 84.89, 1e-9);
    return;
  }
  FAIL() << "ViT-H row missing";
}

TEST(BuildReport, PublishedMrrRows) {
  const auto rows = testing::read_csv(testing::data_dir() / "coco_c_mrr_rows.csv");
  ASSERT_EQ(rows.size(), 46u);
  for (const auto& r : rows) {
    const double clean = std::stod(r.at("clean_map")) / 100;
    const double corr = std::stod(r.at("corr_map")) / 100;
    const auto report = build_report({with_map(clean)}, grid([&](auto, int) { return corr; }));
    EXPECT_NEAR(*report.mrr * 100, std::stod(r.at("published_mrr")), 0.05)
        << r.at("method") << " " << r.at("backbone");
  }
}

TEST(RobustnessProperties, ScaleInvarianceIdentityAndBounds) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const double clean = rng.uniform(0.2, 0.9);
    std::vector<double> cells;
    for (int i = 0; i < 50; ++i) cells.push_back(rng.uniform(0.0, clean));
    auto at = [&](CorruptionKind k, int s) { return cells[kind_index(k) * 5 + (s - 1)]; };
    const auto base = build_report({with_map(clean)}, grid(at));

    double mean = 0;
    for (double c : cells) mean += c;
    mean /= 50;
    ASSERT_NEAR(*base.mrr * clean, mean, 1e-12);
    for (const auto& c : base.corruptions) {
      ASSERT_GE(*c.rr, 0.0);
      ASSERT_LE(*c.rr, 1.0);
    }

    const double lambda = rng.uniform(0.1, 1.0);
    const auto scaled = build_report({with_map(clean * lambda)},
                                     grid([&](CorruptionKind k, int s) { return at(k, s) * lambda; }));
    ASSERT_NEAR(*scaled.mrr, *base.mrr, 1e-12);
    for (std::size_t i = 0; i < 10; ++i) {
      ASSERT_NEAR(*scaled.corruptions[i].rr, *base.corruptions[i].rr, 1e-12);
    }
    for (std::size_t g = 0; g < 4; ++g) {
      ASSERT_NEAR(*scaled.groups[g].mrr, *base.groups[g].mrr, 1e-12);
    }
  }
}

TEST(Render, FormatsAndDeterminism) {
  EXPECT_EQ(format_percent(0.7285), "72.85");
  EXPECT_EQ(format_percent(std::nullopt), "NA");
  EXPECT_EQ(format_percent(1.0), "100.00");
  EXPECT_EQ(parse_report_format("MD"), ReportFormat::kMarkdown);
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::kCsv);
  EXPECT_THROW(parse_report_format("html"), UsageError);

  ReportOptions options;
  options.label = "model-x";
  const auto report = build_report({with_map(0.8)}, grid([](CorruptionKind k, int) {
                                     return k == CorruptionKind::kMask ? 0.72 : 0.4;
                                   }),
                                   options);
  for (auto fmt : {ReportFormat::kMarkdown, ReportFormat::kCsv}) {
    EXPECT_EQ(render(report, fmt), render(report, fmt));
  }

  const auto md = lines(render(report, ReportFormat::kMarkdown));
  ASSERT_GE(md.size(), 3u);
  EXPECT_EQ(md[0].rfind("| Model | Clean mAP | Clean mAR | Overall mAP | Overall mAR | Overall mRR", 0),
            0u);
  EXPECT_NE(md[2].find("model-x"), std::string::npos);
  EXPECT_NE(md[2].find("| 80.00 |"), std::string::npos);
  EXPECT_NE(md[2].find("| 54.00 |"), std::string::npos);

  const auto csv = lines(render(report, ReportFormat::kCsv));
  EXPECT_EQ(csv[0], "row,corruption,severity,mAP,AP50,AP75,AP_M,AP_L,mAR,AR50,AR75,AR_M,AR_L,RR");
  EXPECT_EQ(csv[1].rfind("clean,", 0), 0u);
  int cells = 0;
  bool overall = false;
  for (const auto& line : csv) {
    cells += line.rfind("cell,", 0) == 0;
    overall = overall || line.rfind("overall,", 0) == 0;
  }
  EXPECT_EQ(cells, 50);
  EXPECT_TRUE(overall);
  EXPECT_NE(render(report, ReportFormat::kCsv).find("cell,mask,3,72.00,NA"), std::string::npos);
}

TEST(Render, EmptyReportIsHeaderOnly) {
  const RobustnessReport empty;
  ASSERT_TRUE(empty.empty());
  const auto csv = lines(render(empty, ReportFormat::kCsv));
  ASSERT_EQ(csv.size(), 1u);
  const auto md = lines(render(empty, ReportFormat::kMarkdown));
  ASSERT_EQ(md.size(), 2u);
  EXPECT_EQ(md[0].rfind("| Model |", 0), 0u);
}

TEST(Render, MultiReportSummary) {
  std::vector<RobustnessReport> reports;
  for (double v : {0.4, 0.6}) {
    ReportOptions o;
    o.label = "m" + std::to_string(static_cast<int>(v * 10));
    reports.push_back(build_report({with_map(0.8)}, grid([&](auto, int) { return v; }), o));
  }
  const auto csv = lines(render(reports, ReportFormat::kCsv));
  ASSERT_EQ(csv.size(), 3u);
  EXPECT_EQ(csv[0].rfind("model,clean_map,clean_mar,overall_map", 0), 0u);
  EXPECT_NE(csv[1].find("50.00"), std::string::npos);
  EXPECT_NE(csv[2].find("75.00"), std::string::npos);
  const auto md = lines(render(reports, ReportFormat::kMarkdown));
  EXPECT_EQ(md.size(), 4u);
}

}  // namespace
}  // namespace kpbench
