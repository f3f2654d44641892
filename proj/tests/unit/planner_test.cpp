#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle/log_ols.hpp"
#include "test_support.hpp"
#include "tcsl/laws.hpp"
#include "tcsl/planner.hpp"
#include "tcsl/reference.hpp"

namespace {

using namespace tcsl;

const std::vector<double> kBudgets{5, 30, 60, 120, 240, 480, 720, 1440};

PlanLaws published_laws() {
  return plan_laws(make_law(published::size_law_a, published::size_law_alpha, "minutes", "params_m", 5, 1440),
                   make_law(published::loss_law_a, published::loss_law_alpha, "minutes", "bpb", 5, 1440));
}

PlanLaws fitted_laws() {
  static const auto grid = load_reference_dataset().grid;
  const auto size = fit_optimal_size_law(grid);
  return plan_laws(size.fit, fit_loss_law(grid), size.anchors.front().budget_min, size.anchors.front().params_m);
}

int oracle_snap(double n) {
  int best = 0;
  double d = INFINITY;
  for (const auto& c : reference_configs()) {
    const double e = std::fabs(std::log(c.params_m / n));
    if (e < d) d = e, best = c.depth;
  }
  return best;
}

TEST(Recommend, EightHoursPublishedLaws) {
  const auto r = recommend(480, published_laws(), reference_configs(), rtx4090_profile(), 48e6);
  EXPECT_EQ(r.snapped_depth, 20);
  EXPECT_DOUBLE_EQ(r.snapped_params_m, 519.0);
  EXPECT_NEAR(r.n_star_continuous_m, 14.20 * std::pow(480.0, 0.595), 1e-9);
  EXPECT_NEAR(r.expected_bpb, 1.223 * std::pow(480.0, -0.061), 1e-12);
  EXPECT_NEAR(r.expected_bpb, 0.836, 0.01);
  EXPECT_DOUBLE_EQ(r.tokens, 36e3 * 480 * 60);
  EXPECT_DOUBLE_EQ(r.flops, 6 * 519e6 * r.tokens);
  ASSERT_TRUE(r.epochs.has_value());
  EXPECT_DOUBLE_EQ(*r.epochs, r.tokens / 48e6);
  EXPECT_TRUE(r.notes.empty());
}

TEST(Recommend, EightHoursFittedLaws) {
  const auto r = recommend(480, fitted_laws(), reference_configs(), rtx4090_profile());
  EXPECT_EQ(r.snapped_depth, 20);
  EXPECT_NEAR(r.expected_bpb, 0.836, 0.01);
  EXPECT_FALSE(r.epochs.has_value());
}

TEST(Recommend, SnapsMatchOracleAtEveryBudget) {
  for (const auto& laws : {published_laws(), fitted_laws()}) {
    for (double b : kBudgets) {
      const auto r = recommend(b, laws, reference_configs(), rtx4090_profile());
      EXPECT_EQ(r.snapped_depth, oracle_snap(laws.size_law.coeff_a * std::pow(b, laws.size_law.exponent_alpha))) << b;
    }
  }
}

TEST(Recommend, ChinchillaCurveSharesFirstAnchor) {
  const auto laws = fitted_laws();
  EXPECT_DOUBLE_EQ(laws.chinchilla_anchor_min, 5.0);
  EXPECT_DOUBLE_EQ(laws.chinchilla_anchor_params_m, 50.3);
  const auto r = recommend(20, laws, reference_configs(), rtx4090_profile());
  EXPECT_NEAR(r.chinchilla_n_m, 50.3 * 2.0, 1e-12);
}

TEST(Recommend, ZeroResidualLawSnapsToAnchorModel) {
  const auto size = fit_power_law(std::vector<Point>{{10, 50.3}, {160, 285.2}});
  const auto loss = fit_power_law(std::vector<Point>{{10, 1.2}, {160, 1.0}});
  const auto laws = plan_laws(size, loss, 10, 50.3);
  EXPECT_EQ(recommend(10, laws, reference_configs(), rtx4090_profile()).snapped_depth, 8);
  EXPECT_EQ(recommend(160, laws, reference_configs(), rtx4090_profile()).snapped_depth, 16);
  
}

TEST(Recommend, ExtrapolationNotes) {
  const auto laws = published_laws();
  const auto p = rtx4090_profile();
  EXPECT_TRUE(recommend(1440, laws, reference_configs(), p).notes.size() >= 1);  // largest config
  const auto far = recommend(3000, laws, reference_configs(), p);
  auto has = [&](const PlanRecommendation& r, const std::string& s) {
    for (const auto& n : r.notes)
      if (n.find(s) != std::string::npos) return true;
    return false;
  };
  EXPECT_TRUE(has(far, "extrapolation"));
  EXPECT_TRUE(has(recommend(2000, laws, reference_configs(), p), "extrapolation"));
  EXPECT_FALSE(has(recommend(2000, laws, reference_configs(), p), "far extrapolation"));
  EXPECT_TRUE(has(far, "far extrapolation"));
  EXPECT_TRUE(has(recommend(2, laws, reference_configs(), p), "far extrapolation"));
  EXPECT_TRUE(has(far, "largest available"));
  EXPECT_FALSE(has(recommend(480, laws, reference_configs(), p), "extrapolation"));
}

TEST(Recommend, Errors) {
  EXPECT_THROWS_KIND(invalid_argument, recommend(60, published_laws(), {}, rtx4090_profile()));
  EXPECT_THROWS_KIND(domain, recommend(0, published_laws(), reference_configs(), rtx4090_profile()));
}

TEST(Recommend, MonotoneInBudget) {
  const auto laws = fitted_laws();
  double prev = 0;
  int prev_depth = 0;
  for (double b = 1; b < 5000; b *= 1.1) {
    const auto r = recommend(b, laws, reference_configs(), rtx4090_profile());
    EXPECT_GE(r.n_star_continuous_m, prev);
    EXPECT_GE(r.snapped_depth, prev_depth);
    prev = r.n_star_continuous_m;
    prev_depth = r.snapped_depth;
  }
}

TEST(Snap, IdempotentAtConfigSizes) {
  const auto configs = reference_configs();
  for (std::size_t i = 0; i < configs.size(); ++i) EXPECT_EQ(snap_config(configs, configs[i].params_m), i);
  const auto laws = published_laws();
  for (const auto& c : configs) {
    const double t = std::pow(c.params_m / laws.size_law.coeff_a, 1.0 / laws.size_law.exponent_alpha);
    EXPECT_EQ(recommend(t, laws, configs, rtx4090_profile()).snapped_depth, c.depth);
  }
}

TEST(ScalingRatio, TableRows) {
  EXPECT_NEAR(scaling_ratio(2, 0.60), 1.52, 0.01);
  EXPECT_NEAR(scaling_ratio(2, 0.50), 1.41, 0.01);
  EXPECT_NEAR(scaling_ratio(4, 0.60), 2.30, 0.01);
  EXPECT_NEAR(scaling_ratio(4, 0.50), 2.00, 0.01);
  EXPECT_NEAR(scaling_ratio(10, 0.60), 3.98, 0.01);
  EXPECT_NEAR(scaling_ratio(10, 0.50), 3.16, 0.01);
  EXPECT_NEAR(scaling_ratio(24, 0.60), 6.73, 0.01);
  EXPECT_NEAR(scaling_ratio(24, 0.50), 4.90, 0.01);
  EXPECT_THROWS_KIND(invalid_argument, scaling_ratio(0, 0.5));
}

TEST(ScalingRatio, ExponentAdditivity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> m(1.0, 100.0), a(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = m(rng), p = a(rng), q = a(rng);
    const double lhs = scaling_ratio(x, p) * scaling_ratio(x, q);
    EXPECT_NEAR(lhs, scaling_ratio(x, p + q), 1e-12 * lhs);
  }
  EXPECT_NEAR(scaling_ratio(7, 0.5) * scaling_ratio(7, 0.1), scaling_ratio(7, 0.6), 1e-12);
}

TEST(Guidelines, RowsAndMeasuredColumn) {
  const auto grid = load_reference_dataset().grid;
  const auto rows = guidelines_table(fitted_laws(), reference_configs(), rtx4090_profile(), kBudgets, &grid);
  ASSERT_EQ(rows.size(), 8u);
  const std::vector<std::vector<std::string>> measured{{"D8"},  {"D10"}, {"D14"}, {"D14", "D16"},
                                                       {"D16"}, {"D20"}, {"D24"}, {"D26"}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_TRUE(rows[i].measured_bpb.has_value());
    EXPECT_EQ(rows[i].measured_models, measured[i]);
  }
  EXPECT_NEAR(*rows[5].measured_bpb, 0.836, 1e-12);
  EXPECT_EQ(guidelines_table(fitted_laws(), reference_configs(), rtx4090_profile(), {90}, &grid).front().measured_bpb,
            std::nullopt);
  EXPECT_EQ(guidelines_table(fitted_laws(), reference_configs(), rtx4090_profile(), {60}).size(), 1u);
  EXPECT_TRUE(guidelines_table(fitted_laws(), reference_configs(), rtx4090_profile(), {}).empty());
}

}  // namespace
