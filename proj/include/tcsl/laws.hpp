#pragma once

// Fitting pipelines over a run grid: optimal size, best loss and optimal
// depth against budget, the prefix (alpha evolution) fits and the
// tie-handling sensitivity variants.

#include <algorithm>
#include <string>
#include <vector>

#include "tcsl/budget.hpp"
#include "tcsl/domain.hpp"
#include "tcsl/powerlaw.hpp"

namespace tcsl {

/// Tie-resolved optimum at every budget, ascending; excluded budgets dropped.
inline std::vector<Optimum> optimum_anchors(const RunGrid& grid, const TiePolicy& tie = {}) {
  std::vector<Optimum> out;
  for (double b : grid.budgets()) {
    Optimum o = optimum_at_budget(grid, b, tie);
    if (!o.excluded) out.push_back(std::move(o));
  }
  return out;
}

namespace detail {

enum class AnchorValue { params, bpb, depth };

inline std::vector<Point> anchor_points(const std::vector<Optimum>& anchors, AnchorValue v) {
  std::vector<Point> pts;
  for (const auto& a : anchors) {
    const double y = v == AnchorValue::params ? a.params_m : v == AnchorValue::bpb ? a.bpb : a.depth;
    pts.push_back({a.budget_min, y});
  }
  return pts;
}

inline void require_anchor_count(const std::vector<Optimum>& anchors) {
  if (anchors.size() < 2) fail(ErrorKind::insufficient_data, "need >= 2 budgets with a usable optimum");
}

}  // namespace detail

struct SizeLawResult {
  PowerLawFit fit;
  std::vector<Optimum> anchors;
};

inline SizeLawResult fit_optimal_size_law(const RunGrid& grid, const TiePolicy& tie = {}) {
  auto anchors = optimum_anchors(grid, tie);
  detail::require_anchor_count(anchors);
  auto fit = fit_power_law(detail::anchor_points(anchors, detail::AnchorValue::params), "minutes", "params_m");
  return {std::move(fit), std::move(anchors)};
}

inline PowerLawFit fit_loss_law(const RunGrid& grid) {
  const auto anchors = optimum_anchors(grid, TiePolicy{});
  detail::require_anchor_count(anchors);
  return fit_power_law(detail::anchor_points(anchors, detail::AnchorValue::bpb), "minutes", "bpb");
}

inline PowerLawFit fit_depth_law(const RunGrid& grid, const TiePolicy& tie = {}) {
  const auto anchors = optimum_anchors(grid, tie);
  detail::require_anchor_count(anchors);
  return fit_power_law(detail::anchor_points(anchors, detail::AnchorValue::depth), "minutes", "depth");
}

struct PrefixFit {
  int n_points = 0;
  double last_budget_min = 0.0;
  PowerLawFit fit;
};

/// Fits on the first k anchors for k = 3..K.
inline std::vector<PrefixFit> prefix_fits(const RunGrid& grid, const TiePolicy& tie = {}) {
  const auto anchors = optimum_anchors(grid, tie);
  if (anchors.size() < 3) fail(ErrorKind::insufficient_data, "prefix fits need >= 3 budgets");
  const auto pts = detail::anchor_points(anchors, detail::AnchorValue::params);
  std::vector<PrefixFit> out;
  for (std::size_t k = 3; k <= pts.size(); ++k) {
    std::vector<Point> prefix(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(k));
    out.push_back({static_cast<int>(k), prefix.back().x, fit_power_law(prefix, "minutes", "params_m")});
  }
  return out;
}

struct SensitivityVariant {
  std::string name;
  PowerLawFit fit;
};

struct SensitivityResult {
  std::vector<SensitivityVariant> variants;
  std::vector<std::string> notices;
};

/// The four tie/anchor variants. Variants 2-4 drop the largest budget; the
/// longest budget is taken to be the grid's last one.
inline SensitivityResult sensitivity_suite(const RunGrid& grid, double epsilon_bpb = 0.0005) {
  SensitivityResult out;
  const auto& budgets = grid.budgets();
  if (budgets.size() < 3) {
    out.notices.push_back("sensitivity: fewer than 3 budgets, all variants skipped");
    return out;
  }
  const double last = budgets.back();
  auto drop_last = [&](std::vector<Optimum> a) {
    std::erase_if(a, [&](const Optimum& o) { return same_budget(o.budget_min, last); });
    return a;
  };
  auto run = [&](const std::string& name, const std::vector<Optimum>& anchors) {
    if (anchors.size() < 2) {
      out.notices.push_back(name + ": fewer than 2 anchors, skipped");
      return;
    }
    out.variants.push_back({name, fit_power_law(detail::anchor_points(anchors, detail::AnchorValue::params), "minutes", "params_m")});
  };

  const auto mean_anchors = optimum_anchors(grid, TiePolicy::make(TieMode::arithmetic_mean, epsilon_bpb));
  const bool has_tie = std::any_of(mean_anchors.begin(), mean_anchors.end(), [](const Optimum& o) { return o.tied(); });
  run(std::to_string(mean_anchors.size()) + "-point (baseline)", mean_anchors);

  const auto no_last = drop_last(mean_anchors);
  run(std::to_string(no_last.size()) + "-point (exclude longest budget)", no_last);

  if (!has_tie) out.notices.push_back("sensitivity: no tied budget, tie variants reduce to the baseline");
  const auto larger = drop_last(optimum_anchors(grid, TiePolicy::make(TieMode::pick_larger, epsilon_bpb)));
  run(std::to_string(larger.size()) + "-point (ties = larger model)", larger);

  const auto excluded = drop_last(optimum_anchors(grid, TiePolicy::make(TieMode::exclude_budget, epsilon_bpb)));
  run(std::to_string(excluded.size()) + "-point (exclude tied budget)", excluded);
  return out;
}

}  // namespace tcsl
