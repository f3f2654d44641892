#pragma once

// Per-budget analysis of a run grid: optima, overfitting flags, U-curve
// regimes, marginal returns and multi-seed statistics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcsl/domain.hpp"
#include "tcsl/error.hpp"
#include "tcsl/powerlaw.hpp"
#include "tcsl/stats.hpp"

namespace tcsl {

inline constexpr double kDefaultFlagEpsilon = 0.0005;

struct Optimum {
  double budget_min = 0.0;
  std::vector<std::string> models;  // tie set, ordered by params_m
  double params_m = 0.0;            // tie-resolved
  double depth = 0.0;               // tie-resolved; mean of depths for arithmetic_mean
  double bpb = 0.0;
  bool excluded = false;            // exclude_budget policy hit a tie

  bool tied() const noexcept { return models.size() > 1; }
};

inline Optimum optimum_at_budget(const RunGrid& grid, double budget, const TiePolicy& tie = {}) {
  if (!grid.has_budget(budget)) fail(ErrorKind::not_found, "budget " + std::to_string(budget) + " not in grid");
  const auto recs = grid.at_budget(budget);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : recs) best = std::min(best, r.val_bpb);

  Optimum out;
  out.budget_min = recs.front().budget_min;
  out.bpb = best;
  std::vector<const RunRecord*> tied;
  for (const auto& r : recs) {
    if (r.val_bpb <= best + tie.epsilon_bpb &&
        std::none_of(tied.begin(), tied.end(), [&](const RunRecord* t) { return t->model_id == r.model_id; })) {
      tied.push_back(&r);
      out.models.push_back(r.model_id);
    }
  }
  double sum_p = 0.0, sum_d = 0.0;
  for (const auto* r : tied) {
    sum_p += r->params_m;
    sum_d += r->depth;
  }
  const double k = static_cast<double>(tied.size());
  switch (tie.mode) {
    case TieMode::arithmetic_mean:
    case TieMode::exclude_budget:
      out.params_m = sum_p / k;
      out.depth = sum_d / k;
      out.excluded = tie.mode == TieMode::exclude_budget && tied.size() > 1;
      break;
    case TieMode::pick_larger:
      out.params_m = tied.back()->params_m;
      out.depth = tied.back()->depth;
      break;
    case TieMode::pick_smaller:
      out.params_m = tied.front()->params_m;
      out.depth = tied.front()->depth;
      break;
  }
  return out;
}

struct OverfitFlag {
  std::string model_id;
  std::optional<std::int64_t> seed;
  double budget_min = 0.0;
  double delta_bpb = 0.0;  // versus the model's previous observed budget
};

/// Flags (model, t2) when its BPB exceeds the running minimum over all
/// earlier budgets by more than epsilon. Series are keyed by (model, seed).
inline std::vector<OverfitFlag> overfit_flags(const RunGrid& grid, double epsilon = kDefaultFlagEpsilon) {
  std::map<std::pair<std::string, std::optional<std::int64_t>>, std::vector<const RunRecord*>> series;
  for (const auto& r : grid.records()) series[{r.model_id, r.seed}].push_back(&r);

  std::vector<OverfitFlag> out;
  for (auto& [key, recs] : series) {
    std::sort(recs.begin(), recs.end(), [](const RunRecord* a, const RunRecord* b) { return a->budget_min < b->budget_min; });
    double running_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (i > 0 && recs[i]->val_bpb > running_min + epsilon) {
        out.push_back({key.first, key.second, recs[i]->budget_min, recs[i]->val_bpb - recs[i - 1]->val_bpb});
      }
      running_min = std::min(running_min, recs[i]->val_bpb);
    }
  }
  std::sort(out.begin(), out.end(), [&](const OverfitFlag& a, const OverfitFlag& b) {
    return std::tie(a.budget_min, a.model_id, a.seed) < std::tie(b.budget_min, b.model_id, b.seed);
  });
  return out;
}

enum class RegimeLabel { compute_bounded, transitional, data_bounded };

inline std::string to_string(RegimeLabel r) {
  switch (r) {
    case RegimeLabel::compute_bounded: return "compute_bounded";
    case RegimeLabel::transitional: return "transitional";
    case RegimeLabel::data_bounded: return "data_bounded";
  }
  return "compute_bounded";
}

/// Classifies the U-curve at one budget. Order of tests:
///   1. data_bounded if any model strictly between the smallest observed
///      model and the optimum is overfit-flagged at this budget;
///   2. transitional if BPB is non-increasing over the whole size range;
///   3. compute_bounded otherwise.
/// An overfit flag on the smallest model sits at the grid edge and does not
/// decide the regime.
inline RegimeLabel classify_regime(const RunGrid& grid, double budget, const TiePolicy& tie = {},
                                   double epsilon = kDefaultFlagEpsilon) {
  const auto recs = grid.at_budget(budget);
  if (recs.empty()) fail(ErrorKind::not_found, "budget " + std::to_string(budget) + " not in grid");

  // One value per model (best seed if several).
  std::vector<std::pair<std::string, double>> curve;
  for (const auto& r : recs) {
    auto it = std::find_if(curve.begin(), curve.end(), [&](const auto& c) { return c.first == r.model_id; });
    if (it == curve.end()) {
      curve.emplace_back(r.model_id, r.val_bpb);
    } else {
      it->second = std::min(it->second, r.val_bpb);
    }
  }
  if (curve.size() < 3) fail(ErrorKind::insufficient_data, "regime classification needs >= 3 models at the budget");

  const Optimum opt = optimum_at_budget(grid, budget, tie);
  const auto opt_pos = static_cast<std::size_t>(
      std::find_if(curve.begin(), curve.end(), [&](const auto& c) { return c.first == opt.models.front(); }) - curve.begin());

  std::vector<std::string> flagged;
  for (const auto& f : overfit_flags(grid, epsilon)) {
    if (same_budget(f.budget_min, budget)) flagged.push_back(f.model_id);
  }
  for (std::size_t i = 1; i < opt_pos; ++i) {
    if (std::find(flagged.begin(), flagged.end(), curve[i].first) != flagged.end()) return RegimeLabel::data_bounded;
  }
  bool non_increasing = true;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].second > curve[i - 1].second + epsilon) non_increasing = false;
  }
  return non_increasing ? RegimeLabel::transitional : RegimeLabel::compute_bounded;
}

struct MarginalReturn {
  double from_min = 0.0;
  double to_min = 0.0;
  double delta_bpb = 0.0;
  double bpb_per_hour = 0.0;
};

inline std::vector<MarginalReturn> marginal_returns(const RunGrid& grid) {
  const auto& budgets = grid.budgets();
  if (budgets.size() < 2) fail(ErrorKind::insufficient_data, "marginal returns need >= 2 budgets");
  std::vector<MarginalReturn> out;
  for (std::size_t i = 1; i < budgets.size(); ++i) {
    const double b1 = optimum_at_budget(grid, budgets[i - 1]).bpb;
    const double b2 = optimum_at_budget(grid, budgets[i]).bpb;
    const double delta = b2 - b1;
    out.push_back({budgets[i - 1], budgets[i], delta, delta / ((budgets[i] - budgets[i - 1]) / 60.0)});
  }
  return out;
}

struct SeedStats {
  std::string model_id;
  double params_m = 0.0;
  std::vector<double> values;
  double mean = 0.0;
  double sample_std = 0.0;
  double population_std = 0.0;
  double cv_pct = 0.0;             // sample convention
  double cv_population_pct = 0.0;  // population convention
};

struct MultiSeedReport {
  std::vector<SeedStats> models;
  // dominance[i][j]: every seed value of models[i] is below every seed value of models[j].
  std::vector<std::vector<bool>> dominance;
  std::vector<std::string> notices;

  const SeedStats* find(const std::string& id) const {
    auto it = std::find_if(models.begin(), models.end(), [&](const SeedStats& s) { return s.model_id == id; });
    return it == models.end() ? nullptr : &*it;
  }

  bool dominates(const std::string& a, const std::string& b) const {
    std::size_t ia = models.size(), ib = models.size();
    for (std::size_t i = 0; i < models.size(); ++i) {
      if (models[i].model_id == a) ia = i;
      if (models[i].model_id == b) ib = i;
    }
    if (ia == models.size() || ib == models.size()) fail(ErrorKind::not_found, "model not in multi-seed report");
    return dominance[ia][ib];
  }
};

inline MultiSeedReport multiseed_stats(const RunGrid& grid) {
  MultiSeedReport out;
  for (const auto& id : grid.models()) {
    SeedStats s;
    s.model_id = id;
    for (const auto& r : grid.records()) {
      if (r.model_id == id) {
        s.values.push_back(r.val_bpb);
        s.params_m = r.params_m;
      }
    }
    if (s.values.size() < 2) {
      out.notices.push_back(id + ": single seed, skipped");
      continue;
    }
    s.mean = stats::mean(s.values);
    s.sample_std = stats::stddev(s.values, 1);
    s.population_std = stats::stddev(s.values, 0);
    s.cv_pct = s.sample_std / s.mean * 100.0;
    s.cv_population_pct = s.population_std / s.mean * 100.0;
    out.models.push_back(std::move(s));
  }
  const auto m = out.models.size();
  out.dominance.assign(m, std::vector<bool>(m, false));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const double worst_i = *std::max_element(out.models[i].values.begin(), out.models[i].values.end());
      const double best_j = *std::min_element(out.models[j].values.begin(), out.models[j].values.end());
      out.dominance[i][j] = worst_i < best_j;
    }
  }
  return out;
}

struct BudgetReport {
  double budget_min = 0.0;
  std::vector<std::string> optimum_models;
  double optimum_params_m = 0.0;
  double optimum_bpb = 0.0;
  std::optional<RegimeLabel> regime;  // absent when fewer than 3 models were run
  std::vector<std::string> overfit_models;
};

inline std::vector<BudgetReport> budget_reports(const RunGrid& grid, const TiePolicy& tie = {},
                                                double epsilon = kDefaultFlagEpsilon) {
  const auto flags = overfit_flags(grid, epsilon);
  std::vector<BudgetReport> out;
  for (double b : grid.budgets()) {
    const Optimum opt = optimum_at_budget(grid, b, tie);
    BudgetReport rep;
    rep.budget_min = b;
    rep.optimum_models = opt.models;
    rep.optimum_params_m = opt.params_m;
    rep.optimum_bpb = opt.bpb;
    try {
      rep.regime = classify_regime(grid, b, tie, epsilon);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::insufficient_data) throw;
    }
    for (const auto& f : flags) {
      if (same_budget(f.budget_min, b) &&
          std::find(rep.overfit_models.begin(), rep.overfit_models.end(), f.model_id) == rep.overfit_models.end()) {
        rep.overfit_models.push_back(f.model_id);
      }
    }
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace tcsl
