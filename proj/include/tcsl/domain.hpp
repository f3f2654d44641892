#pragma once

// Core value types shared by every module: architecture rows, run
// observations, the run grid and a fitted power law.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tcsl/error.hpp"

namespace tcsl {

/// Width of every attention head, fixed by the depth parameterization.
inline constexpr int kHeadDim = 64;

struct Dims {
  int layers = 0;
  int dim = 0;
  int heads = 0;
  int head_dim = 0;

  friend bool operator==(const Dims&, const Dims&) = default;
};

/// layers = depth, width = 64 * depth, heads = depth.
inline Dims derive_dims(int depth) {
  if (depth < 1) fail(ErrorKind::invalid_argument, "depth must be >= 1, got " + std::to_string(depth));
  return Dims{depth, kHeadDim * depth, depth, kHeadDim};
}

/// One architecture row. params_m is always measured data; nothing in this
/// library derives a parameter count from depth.
struct ModelConfig {
  int depth = 0;
  int layers = 0;
  int dim = 0;
  int heads = 0;
  int head_dim = 0;
  double params_m = 0.0;
  bool params_exact = true;
  std::optional<double> tokens_per_sec;
  std::optional<double> mfu_pct;

  Dims dims() const { return Dims{layers, dim, heads, head_dim}; }
};

inline ModelConfig make_config(int depth, double params_m, bool params_exact = true,
                               std::optional<double> tokens_per_sec = std::nullopt,
                               std::optional<double> mfu_pct = std::nullopt) {
  const Dims d = derive_dims(depth);
  return ModelConfig{depth, d.layers, d.dim, d.heads, d.head_dim, params_m, params_exact, tokens_per_sec, mfu_pct};
}

inline double aspect_ratio(const ModelConfig& config) {
  return static_cast<double>(config.dim) / static_cast<double>(config.layers);
}

/// Returns human-readable violations; empty means the row obeys the depth
/// parameterization.
inline std::vector<std::string> validate(const ModelConfig& c) {
  std::vector<std::string> out;
  if (c.depth < 1) out.push_back("depth must be >= 1");
  if (c.depth >= 1 && c.dims() != derive_dims(c.depth)) out.push_back("dimensions do not follow depth parameterization");
  if (!(c.params_m > 0.0)) out.push_back("params_m must be positive");
  if (c.tokens_per_sec && !(*c.tokens_per_sec > 0.0)) out.push_back("tokens_per_sec must be positive");
  if (c.mfu_pct && !(*c.mfu_pct > 0.0)) out.push_back("mfu_pct must be positive");
  return out;
}

/// Table-level checks: params strictly increasing in depth, throughput
/// strictly decreasing where present.
inline std::vector<std::string> validate_table(std::vector<ModelConfig> configs) {
  std::vector<std::string> out;
  std::sort(configs.begin(), configs.end(), [](const auto& a, const auto& b) { return a.depth < b.depth; });
  for (const auto& c : configs) {
    for (auto& v : validate(c)) out.push_back("D" + std::to_string(c.depth) + ": " + v);
  }
  std::optional<double> last_tps;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (i > 0 && configs[i].depth == configs[i - 1].depth) out.push_back("duplicate depth " + std::to_string(configs[i].depth));
    if (i > 0 && !(configs[i].params_m > configs[i - 1].params_m)) {
      out.push_back("params_m not strictly increasing at D" + std::to_string(configs[i].depth));
    }
    if (configs[i].tokens_per_sec) {
      if (last_tps && !(*configs[i].tokens_per_sec < *last_tps)) {
        out.push_back("tokens_per_sec not strictly decreasing at D" + std::to_string(configs[i].depth));
      }
      last_tps = configs[i].tokens_per_sec;
    }
  }
  return out;
}

struct RunRecord {
  std::string model_id;
  int depth = 0;
  double params_m = 0.0;
  double budget_min = 0.0;
  double val_bpb = 0.0;
  std::optional<std::int64_t> seed;
  std::optional<double> tokens_per_sec;
  std::string architecture = "dense";

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Budgets are compared with a relative tolerance so that values parsed from
/// "4h" and "240" coincide.
inline bool same_budget(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(a)); }

/// Immutable collection of observations. Construction enforces the grid
/// invariants and throws Error(invalid_argument) on violation.
class RunGrid {
 public:
  RunGrid() = default;

  explicit RunGrid(std::vector<RunRecord> records, std::optional<std::int64_t> dataset_tokens = std::nullopt)
      : records_(std::move(records)), dataset_tokens_(dataset_tokens) {
    if (records_.empty()) fail(ErrorKind::empty_input, "run grid has no records");
    if (dataset_tokens_ && *dataset_tokens_ <= 0) fail(ErrorKind::invalid_argument, "dataset_tokens must be positive");
    std::map<int, double> depth_params;
    std::set<std::tuple<std::string, double, std::int64_t, bool>> keys;
    for (const auto& r : records_) {
      if (!(r.val_bpb > 0.0) || !std::isfinite(r.val_bpb)) fail(ErrorKind::invalid_argument, "val_bpb must be positive for " + r.model_id);
      if (!(r.budget_min > 0.0) || !std::isfinite(r.budget_min)) fail(ErrorKind::invalid_argument, "budget_min must be positive for " + r.model_id);
      if (r.depth < 1) fail(ErrorKind::invalid_argument, "depth must be >= 1 for " + r.model_id);
      if (!(r.params_m > 0.0)) fail(ErrorKind::invalid_argument, "params_m must be positive for " + r.model_id);
      auto [it, inserted] = depth_params.emplace(r.depth, r.params_m);
      if (!inserted && it->second != r.params_m) {
        fail(ErrorKind::invalid_argument, "depth " + std::to_string(r.depth) + " carries two params_m values");
      }
      const double b = canonical_budget(r.budget_min);
      if (!keys.emplace(r.model_id, b, r.seed.value_or(0), r.seed.has_value()).second) {
        fail(ErrorKind::invalid_argument, "duplicate record for " + r.model_id + " at budget " + std::to_string(r.budget_min));
      }
    }
    for (const auto& r : records_) {
      if (std::none_of(budgets_.begin(), budgets_.end(), [&](double b) { return same_budget(b, r.budget_min); })) {
        budgets_.push_back(r.budget_min);
      }
    }
    std::sort(budgets_.begin(), budgets_.end());
  }

  const std::vector<RunRecord>& records() const noexcept { return records_; }
  const std::vector<double>& budgets() const noexcept { return budgets_; }
  std::optional<std::int64_t> dataset_tokens() const noexcept { return dataset_tokens_; }
  std::size_t size() const noexcept { return records_.size(); }

  bool has_budget(double budget) const {
    return std::any_of(budgets_.begin(), budgets_.end(), [&](double b) { return same_budget(b, budget); });
  }

  /// Records at one budget, sorted by params_m then model_id.
  std::vector<RunRecord> at_budget(double budget) const {
    std::vector<RunRecord> out;
    for (const auto& r : records_) {
      if (same_budget(r.budget_min, budget)) out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](const RunRecord& a, const RunRecord& b) {
      return std::tie(a.params_m, a.model_id, a.seed) < std::tie(b.params_m, b.model_id, b.seed);
    });
    return out;
  }

  /// Distinct model ids ordered by params_m.
  std::vector<std::string> models() const {
    std::vector<std::pair<double, std::string>> seen;
    for (const auto& r : records_) {
      if (std::none_of(seen.begin(), seen.end(), [&](const auto& p) { return p.second == r.model_id; })) {
        seen.emplace_back(r.params_m, r.model_id);
      }
    }
    std::sort(seen.begin(), seen.end());
    std::vector<std::string> out;
    for (auto& s : seen) out.push_back(std::move(s.second));
    return out;
  }

 private:
  // Round to 1e-9 minutes so the uniqueness key agrees with same_budget().
  static double canonical_budget(double b) { return std::round(b * 1e9) / 1e9; }

  std::vector<RunRecord> records_;
  std::optional<std::int64_t> dataset_tokens_;
  std::vector<double> budgets_;
};

/// y = coeff_a * x^exponent_alpha fitted in log-log space.
struct PowerLawFit {
  double coeff_a = 1.0;
  double exponent_alpha = 0.0;
  double r2 = 1.0;
  double stderr_alpha = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  int n_points = 0;
  std::string x_unit;
  std::string y_unit;
  // n_points == 2: no residual degrees of freedom, the interval is infinite.
  bool ci_degenerate = false;
  // Zero variance in log y: R^2 is undefined and r2 holds NaN.
  bool r2_undefined = false;
  // Observed x range; zero when the law was supplied rather than fitted.
  double x_min = 0.0;
  double x_max = 0.0;
};

/// A law with known coefficients and no fit statistics, e.g. a published one.
inline PowerLawFit make_law(double coeff_a, double exponent_alpha, std::string x_unit = {}, std::string y_unit = {},
                            double x_min = 0.0, double x_max = 0.0) {
  PowerLawFit f;
  f.coeff_a = coeff_a;
  f.exponent_alpha = exponent_alpha;
  f.r2 = std::nan("");
  f.r2_undefined = true;
  f.ci95_low = exponent_alpha;
  f.ci95_high = exponent_alpha;
  f.n_points = 0;
  f.x_unit = std::move(x_unit);
  f.y_unit = std::move(y_unit);
  f.x_min = x_min;
  f.x_max = x_max;
  return f;
}

}  // namespace tcsl
