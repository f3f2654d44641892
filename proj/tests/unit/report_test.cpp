#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracle/log_ols.hpp"
#include "test_support.hpp"
#include "tcsl/report.hpp"
#include "tcsl/svg.hpp"

namespace {

using namespace tcsl;

const ReportBundle& embedded() {
  static const ReportBundle b = [] {
    const auto ref = load_reference_dataset();
    const auto prof = rtx4090_profile();
    return build_report(ref.grid, ReportOptions{}, &prof, &ref.multiseed, "embedded");
  }();
  return b;
}

bool has_note(const std::vector<std::string>& notes, const std::string& needle) {
  for (const auto& n : notes)
    if (n.find(needle) != std::string::npos) return true;
  return false;
}

RunGrid two_budget_grid() {
  std::vector<RunRecord> recs;
  const std::vector<std::pair<int, double>> models{{8, 50.3}, {10, 85.9}, {12, 135.3}};
  const double bpb[2][3] = {{1.10, 1.15, 1.20}, {1.00, 0.95, 0.97}};
  for (int b = 0; b < 2; ++b) {
    for (int m = 0; m < 3; ++m) {
      recs.push_back({"D" + std::to_string(models[m].first), models[m].first, models[m].second, b ? 60.0 : 10.0,
                      bpb[b][m], std::nullopt, std::nullopt, "dense"});
    }
  }
  return RunGrid(std::move(recs));
}

TEST(Report, EmbeddedSections) {
  const auto& b = embedded();
  ASSERT_TRUE(b.size_law && b.loss_law && b.depth_law && b.size_law_bootstrap && b.throughput && b.multiseed);
  EXPECT_EQ(b.budget_reports.size(), 8u);
  EXPECT_EQ(b.marginal.size(), 7u);
  EXPECT_EQ(b.alpha_evolution.size(), 6u);
  EXPECT_EQ(b.comparison.size(), 4u);
  EXPECT_EQ(b.size_law->fit.n_points, 8);
  EXPECT_NEAR(b.size_law_bootstrap->low, 0.4891, 5e-4);
  EXPECT_NEAR(b.size_law_bootstrap->high, 0.6828, 5e-4);
  EXPECT_NEAR(b.comparison[3].headline, 6.73, 0.01);
  EXPECT_NEAR(b.comparison[0].fitted, std::pow(2.0, b.size_law->fit.exponent_alpha), 1e-15);
  EXPECT_NEAR(b.throughput->compute_exponent, 1 - b.throughput->law.beta, 1e-15);
}

TEST(Report, DiscrepancyNotesPresent) {
  const auto& n = embedded().discrepancy_notes;
  for (const char* needle : {"size law", "7-point", "24x", "beta", "D24 at 5 min", "D8 at 12h", "D26 at 24h", "CV"}) {
    EXPECT_TRUE(has_note(n, needle)) << needle;
  }
}

// The 24x ratio row disagrees with its own arithmetic, so it is always noted.
TEST(Report, OnlyRatioNoteWhenMatchingPublishedValues) {
  ReportBundle b;
  b.size_law = SizeLawResult{};
  b.size_law->fit = make_law(published::size_law_a, published::size_law_alpha);
  b.size_law->fit.r2 = published::size_law_r2;
  b.size_law->fit.ci95_low = published::size_law_ci_low;
  b.size_law->fit.ci95_high = published::size_law_ci_high;
  b.loss_law = make_law(published::loss_law_a, published::loss_law_alpha);
  b.loss_law->r2 = published::loss_law_r2;
  add_discrepancy_notes(b, nullptr);
  ASSERT_EQ(b.discrepancy_notes.size(), 1u);
  EXPECT_TRUE(has_note(b.discrepancy_notes, "24x"));
}

TEST(Report, TwoBudgetGridDegenerates) {
  const auto b = build_report(two_budget_grid(), ReportOptions{}, nullptr, nullptr, "small");
  ASSERT_TRUE(b.size_law.has_value());
  EXPECT_EQ(b.size_law->fit.n_points, 2);
  EXPECT_TRUE(b.size_law->fit.ci_degenerate);
  EXPECT_FALSE(b.size_law_bootstrap.has_value());
  EXPECT_TRUE(b.alpha_evolution.empty());
  EXPECT_TRUE(has_note(b.notices, "bootstrap skipped"));
  EXPECT_TRUE(has_note(b.notices, "degenerate"));
  const auto j = to_json(b);
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_FALSE(j["fits"]["size_law"].contains("bootstrap_ci95"));
  EXPECT_TRUE(nlohmann::json::accept(j.dump()));
}

TEST(Report, JsonLayout) {
  const auto j = to_json(embedded());
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["source"], "embedded");
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(j["budget_reports"].size(), 8u);
  EXPECT_EQ(j["fits"]["size_law"]["anchors"].size(), 8u);
  EXPECT_EQ(j["fits"]["size_law"]["bootstrap_resamples"], kBootstrapResamples);
  EXPECT_EQ(j["budget_reports"][3]["optimum_models"], nlohmann::ordered_json::array({"D14", "D16"}));
  EXPECT_EQ(j["discrepancy_notes"].size(), embedded().discrepancy_notes.size());
  const auto fit = embedded().size_law->fit;
  EXPECT_DOUBLE_EQ(j["fits"]["size_law"]["exponent_alpha"].get<double>(), fit.exponent_alpha);
}

TEST(Report, NaNSerializesAsNull) {
  PowerLawFit f = make_law(2.0, 0.5);
  const auto j = to_json(f);
  EXPECT_TRUE(j["r2"].is_null());
}

TEST(Report, CsvIsLongFormat) {
  const auto csv = to_csv(embedded());
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "section,item,field,value");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    int commas = 0;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) ++commas;
    }
    EXPECT_EQ(commas, 3) << line;
  }
  EXPECT_GT(rows, 50);
  EXPECT_NE(csv.find("meta,report,schema_version,1"), std::string::npos);
}

TEST(Report, Deterministic) {
  const auto ref = load_reference_dataset();
  const auto prof = rtx4090_profile();
  const auto a = build_report(ref.grid, ReportOptions{}, &prof, &ref.multiseed, "embedded");
  EXPECT_EQ(to_json(a).dump(), to_json(embedded()).dump());
  EXPECT_EQ(to_csv(a), to_csv(embedded()));
  ReportOptions other;
  other.seed = 8;
  const auto c = build_report(ref.grid, other, &prof, nullptr, "embedded");
  EXPECT_NE(c.size_law_bootstrap->low, a.size_law_bootstrap->low);
}

TEST(Svg, WellFormedAndDeterministic) {
  const auto grid = load_reference_dataset().grid;
  const auto& b = embedded();
  const std::vector<std::string> charts{svg::u_curves(grid, TiePolicy{}), svg::size_law(*b.size_law),
                                        svg::loss_law(optimum_anchors(grid), *b.loss_law), svg::heatmap(grid, TiePolicy{})};
  for (const auto& s : charts) {
    EXPECT_EQ(s.rfind("<svg", 0), 0u);
    EXPECT_NE(s.find("</svg>"), std::string::npos);
    EXPECT_EQ(s.find("nan"), std::string::npos);
    EXPECT_EQ(s.find("inf"), std::string::npos);
  }
  EXPECT_EQ(charts[0], svg::u_curves(grid, TiePolicy{}));
  EXPECT_EQ(charts[3], svg::heatmap(grid, TiePolicy{}));
  EXPECT_NE(charts[3].find("#d4a017"), std::string::npos);
  EXPECT_NE(charts[3].find("#bdbdbd"), std::string::npos);  // unmeasured cells
}

TEST(Svg, EscapeAndRamp) {
  EXPECT_EQ(svg::escape("a<b&\"c\">"), "a&lt;b&amp;&quot;c&quot;&gt;");
  EXPECT_EQ(svg::num(1.0), "1.000");
  EXPECT_EQ(svg::ramp(0.0), svg::ramp(-1.0));
  EXPECT_EQ(svg::ramp(1.0), svg::ramp(2.0));
  EXPECT_NE(svg::ramp(0.0), svg::ramp(1.0));
}

}  // namespace
