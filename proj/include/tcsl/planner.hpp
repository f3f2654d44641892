#pragma once

// Model-size recommendations for a wall-clock budget from fitted laws and a
// hardware profile.

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tcsl/budget.hpp"
#include "tcsl/domain.hpp"
#include "tcsl/hardware.hpp"
#include "tcsl/powerlaw.hpp"

namespace tcsl {

struct PlanLaws {
  PowerLawFit size_law;  // params_m vs minutes
  PowerLawFit loss_law;  // bpb vs minutes
  // (budget_min, params_m) where the alpha = 0.50 comparison curve starts.
  double chinchilla_anchor_min = 0.0;
  double chinchilla_anchor_params_m = 0.0;
};

/// Laws fitted on a grid; the comparison curve is anchored at the smallest
/// budget's optimum.
inline PlanLaws plan_laws(const PowerLawFit& size_law, const PowerLawFit& loss_law, double anchor_min, double anchor_params_m) {
  return PlanLaws{size_law, loss_law, anchor_min, anchor_params_m};
}

/// Laws without anchors (e.g. published coefficients); anchor at the law's
/// value at the smallest fitted budget, or at 1 minute when no range is known.
inline PlanLaws plan_laws(const PowerLawFit& size_law, const PowerLawFit& loss_law) {
  const double t0 = size_law.x_min > 0.0 ? size_law.x_min : 1.0;
  return PlanLaws{size_law, loss_law, t0, evaluate(size_law, t0)};
}

struct PlanRecommendation {
  double budget_min = 0.0;
  double n_star_continuous_m = 0.0;
  int snapped_depth = 0;
  double snapped_params_m = 0.0;
  double expected_bpb = 0.0;
  double tokens = 0.0;
  std::optional<double> epochs;
  double flops = 0.0;
  double chinchilla_n_m = 0.0;
  std::vector<std::string> notes;
  // Filled by guidelines_table when a measured grid is supplied.
  std::optional<double> measured_bpb;
  std::vector<std::string> measured_models;
};

inline double scaling_ratio(double multiplier, double alpha) {
  if (!(multiplier > 0.0)) fail(ErrorKind::invalid_argument, "multiplier must be positive");
  return std::pow(multiplier, alpha);
}

/// Index of the config nearest to params_m in log space.
inline std::size_t snap_config(const std::vector<ModelConfig>& configs, double params_m) {
  if (configs.empty()) fail(ErrorKind::invalid_argument, "config table is empty");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const double d = std::fabs(std::log(configs[i].params_m) - std::log(params_m));
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

inline PlanRecommendation recommend(double budget_min, const PlanLaws& laws, const std::vector<ModelConfig>& configs,
                                    const HardwareProfile& profile, std::optional<double> dataset_tokens = std::nullopt) {
  if (configs.empty()) fail(ErrorKind::invalid_argument, "config table is empty");
  if (!(budget_min > 0.0)) fail(ErrorKind::domain, "budget must be positive");

  PlanRecommendation rec;
  rec.budget_min = budget_min;
  rec.n_star_continuous_m = evaluate(laws.size_law, budget_min);
  const auto& cfg = configs[snap_config(configs, rec.n_star_continuous_m)];
  rec.snapped_depth = cfg.depth;
  rec.snapped_params_m = cfg.params_m;
  rec.expected_bpb = evaluate(laws.loss_law, budget_min);
  rec.tokens = tokens_processed(profile, cfg.params_m, budget_min);
  rec.flops = flops(profile, cfg.params_m, budget_min);
  if (dataset_tokens) rec.epochs = epochs(profile, cfg.params_m, budget_min, *dataset_tokens);
  rec.chinchilla_n_m = laws.chinchilla_anchor_params_m * std::pow(budget_min / laws.chinchilla_anchor_min, 0.5);

  const auto& law = laws.size_law;
  if (law.x_max > 0.0) {
    std::ostringstream note;
    if (budget_min < law.x_min || budget_min > law.x_max) {
      note << "extrapolation: budget " << budget_min << " min lies outside the fitted range [" << law.x_min << ", "
           << law.x_max << "] min";
      rec.notes.push_back(note.str());
    }
    if (budget_min < 0.5 * law.x_min || budget_min > 2.0 * law.x_max) {
      rec.notes.push_back("far extrapolation: budget is beyond 0.5x-2x of the fitted range");
    }
  }
  double largest = 0.0;
  for (const auto& c : configs) largest = std::max(largest, c.params_m);
  if (cfg.params_m == largest) {
    std::ostringstream note;
    note << "snapped to the largest available config; the optimum may exceed it";
    if (profile.vram_gb) note << " (VRAM " << *profile.vram_gb << " GB)";
    rec.notes.push_back(note.str());
  }
  if (throughput_at(profile, cfg.params_m).extrapolated) rec.notes.push_back("throughput extrapolated from fitted law");
  return rec;
}

/// One recommendation per budget; measured optima from `measured` are added
/// alongside the law prediction when that budget was run.
inline std::vector<PlanRecommendation> guidelines_table(const PlanLaws& laws, const std::vector<ModelConfig>& configs,
                                                        const HardwareProfile& profile, const std::vector<double>& budgets,
                                                        const RunGrid* measured = nullptr,
                                                        std::optional<double> dataset_tokens = std::nullopt,
                                                        const TiePolicy& tie = {}) {
  std::vector<PlanRecommendation> out;
  for (double b : budgets) {
    auto rec = recommend(b, laws, configs, profile, dataset_tokens);
    if (measured && measured->has_budget(b)) {
      const auto opt = optimum_at_budget(*measured, b, tie);
      rec.measured_bpb = opt.bpb;
      rec.measured_models = opt.models;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace tcsl
