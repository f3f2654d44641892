#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "tcsl/budget.hpp"
#include "tcsl/reference.hpp"
#include "tcsl/sim.hpp"

namespace {

using namespace tcsl;

const std::vector<double> kBudgets(kReferenceBudgets.begin(), kReferenceBudgets.end());

std::vector<RegimeLabel> regimes(const RunGrid& g) {
  std::vector<RegimeLabel> out;
  for (const auto& r : budget_reports(g))
    if (r.regime) out.push_back(*r.regime);
  return out;
}

TEST(EffectiveData, BelowDatasetIsIdentity) {
  EXPECT_EQ(effective_data(1e6, 48e6, 1.2), 1e6);
  EXPECT_EQ(effective_data(48e6, 48e6, 1.2), 48e6);
  EXPECT_EQ(effective_data(1e12, kUnlimitedData, 1.2), 1e12);
}

TEST(EffectiveData, SaturatesAtOnePlusRStar) {
  const double u = 48e6;
  EXPECT_NEAR(effective_data(2 * u, u, 1.2), u * (1 + 1.2 * (1 - std::exp(-1 / 1.2))), 1e-6);
  EXPECT_NEAR(effective_data(1e6 * u, u, 1.2), u * 2.2, 1e-3);
  double prev = 0;
  for (double t = 1e6; t < 1e12; t *= 1.5) {
    const double e = effective_data(t, u, 1.2);
    EXPECT_GE(e, prev);
    EXPECT_LE(e, t);
    prev = e;
  }
  EXPECT_THROWS_KIND(domain, effective_data(-1, u, 1.2));
}

TEST(SimulatedLoss, MatchesClosedForm) {
  const auto prof = rtx4090_profile();
  const SimParams p;
  const double tokens = 428e3 * 1440 * 60;
  const double reps = tokens / p.u_tokens - 1;
  const double expected = p.e_floor + p.a_n / std::pow(50.3e6, p.exp_n) +
                          p.b_d / std::pow(effective_data(tokens, p.u_tokens, p.r_star), p.exp_d) +
                          p.gamma * std::pow(reps - p.r0, p.p_exp);
  EXPECT_NEAR(simulated_loss(50.3, 1440, p, prof), expected, 1e-12);
}

TEST(SimulatedLoss, MonotoneWithoutPenaltyOrDataLimit) {
  const auto prof = rtx4090_profile();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> e(0.05, 1.0), an(10, 5000), xn(0.1, 0.8), bd(10, 5000), xd(0.1, 0.8);
  const auto configs = reference_configs();
  for (int trial = 0; trial < 200; ++trial) {
    SimParams p;
    p.e_floor = e(rng);
    p.a_n = an(rng);
    p.exp_n = xn(rng);
    p.b_d = bd(rng);
    p.exp_d = xd(rng);
    p.gamma = 0;
    p.u_tokens = kUnlimitedData;
    for (const auto& c : configs) {
      double prev = INFINITY;
      for (double b : kBudgets) {
        const double l = simulated_loss(c.params_m, b, p, prof);
        EXPECT_LT(l, prev);
        prev = l;
      }
    }
    // Throughput couples size to tokens; with the data term switched off
    // loss falls with size.
    for (std::size_t i = 1; i < configs.size(); ++i) {
      SimParams q = p;
      q.b_d = 1e-300;
      EXPECT_LT(simulated_loss(configs[i].params_m, 60, q, prof), simulated_loss(configs[i - 1].params_m, 60, q, prof));
    }
  }
}

TEST(SimulatedLoss, PenaltyGrowsWithGamma) {
  const auto prof = rtx4090_profile();
  SimParams p;
  double prev = 0;
  for (double g : {0.0, 1e-6, 1e-5, 1e-4, 1e-3}) {
    p.gamma = g;
    const double l = simulated_loss(50.3, 1440, p, prof);
    EXPECT_GT(l, prev);
    prev = l;
  }
  p.gamma = 1.0;
  EXPECT_EQ(simulated_loss(855.6, 5, p, prof), simulated_loss(855.6, 5, SimParams{}, prof));
}

TEST(Sweep, DefaultsProduceThreeRegimesInOrder) {
  const auto res = sweep(SimParams::defaults(), rtx4090_profile(), kBudgets, reference_configs());
  EXPECT_EQ(res.grid.size(), kBudgets.size() * reference_configs().size());
  const auto seq = regimes(res.grid);
  const std::vector<RegimeLabel> want{RegimeLabel::compute_bounded, RegimeLabel::transitional, RegimeLabel::data_bounded};
  std::size_t k = 0;
  for (auto r : seq)
    if (k < want.size() && r == want[k]) ++k;
  EXPECT_EQ(k, want.size());
  EXPECT_EQ(seq.back(), RegimeLabel::data_bounded);
}

TEST(Sweep, Validation) {
  SimParams bad;
  bad.exp_n = -1;
  EXPECT_THROWS_KIND(invalid_argument, sweep(bad, rtx4090_profile(), kBudgets, reference_configs()));
  EXPECT_THROWS_KIND(invalid_argument, sweep(SimParams{}, rtx4090_profile(), {}, reference_configs()));
  bad = SimParams{};
  bad.p_exp = 0.5;
  EXPECT_FALSE(validate(bad).empty());
  EXPECT_TRUE(validate(SimParams{}).empty());
}

TEST(Calibrate, RecoversGeneratingParams) {
  const auto prof = rtx4090_profile();
  const auto truth = SimParams::defaults();
  const auto target = sweep(truth, prof, kBudgets, reference_configs()).grid;
  SimParams start = truth;
  const std::array<double, 9> mult{1.05, 0.95, 1.02, 1.05, 0.98, 1.1, 1.2, 1.05, 1.03};
  auto f = detail::sim_fields(start);
  for (std::size_t i = 0; i < f.size(); ++i) *f[i] *= mult[i];
  const auto res = calibrate(start, target, prof, 2000, 7);
  EXPECT_LT(res.rmse, 1e-6);
  EXPECT_GT(res.initial_rmse, 1e-3);
}

TEST(Calibrate, ImprovesOnReferenceGrid) {
  const auto prof = rtx4090_profile();
  const auto grid = load_reference_dataset().grid;
  const auto res = calibrate(SimParams::defaults(), grid, prof, 200, 7);
  EXPECT_LE(res.rmse, 0.05);
  EXPECT_LT(res.rmse, res.initial_rmse);
  EXPECT_NEAR(simulation_rmse(res.params, grid, prof), res.rmse, 1e-12);
  EXPECT_TRUE(validate(res.params).empty());
  const auto again = calibrate(SimParams::defaults(), grid, prof, 200, 7);
  EXPECT_EQ(again.params, res.params);
}

TEST(Calibrate, EdgeCases) {
  const auto prof = rtx4090_profile();
  const auto grid = load_reference_dataset().grid;
  const auto zero = calibrate(SimParams::defaults(), grid, prof, 0, 1);
  EXPECT_EQ(zero.params, SimParams::defaults());
  EXPECT_EQ(zero.rmse, zero.initial_rmse);
  EXPECT_THROWS_KIND(invalid_argument, calibrate(SimParams::defaults(), grid, prof, -1, 1));
  EXPECT_THROWS_KIND(empty_input, RunGrid(std::vector<RunRecord>{}));
  SimParams g0;
  g0.gamma = 0;
  const auto held = calibrate(g0, grid, prof, 3, 1);
  EXPECT_EQ(held.params.gamma, 0.0);
  EXPECT_FALSE(held.notes.empty());
}

TEST(SimParamsJson, RoundTrip) {
  SimParams p;
  p.a_n = 123.456789012345;
  p.u_tokens = kUnlimitedData;
  const auto back = sim_params_from_json(nlohmann::json::parse(to_json(p).dump()));
  EXPECT_EQ(back, p);
  EXPECT_EQ(sim_params_from_json(nlohmann::json::object()), SimParams::defaults());
  EXPECT_THROWS_KIND(invalid_argument, sim_params_from_json(nlohmann::json::parse(R"({"a_n": "x"})")));
  EXPECT_THROWS_KIND(invalid_argument, sim_params_from_json(nlohmann::json::parse(R"({"gamma": -1})")));
}

}  // namespace
