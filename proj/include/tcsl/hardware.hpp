#pragma once

// Throughput law tau(N) = c * N^-beta and the time <-> compute bridge
// C = 6 * N * tau(N) * t.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tcsl/error.hpp"
#include "tcsl/powerlaw.hpp"

namespace tcsl {

struct ThroughputPoint {
  double params_m = 0.0;
  double tokens_per_sec = 0.0;
  bool exact = true;  // false for rows reported only approximately
};

struct ThroughputLaw {
  double c = 0.0;     // tokens/sec at 1M params
  double beta = 0.0;  // tau ~ N^-beta
  double r2 = 0.0;
  int n_points = 0;
};

struct HardwareProfile {
  std::string name;
  std::vector<ThroughputPoint> points;
  std::optional<double> fitted_c;
  std::optional<double> fitted_beta;
  std::optional<double> vram_gb;

  bool fitted() const noexcept { return fitted_c.has_value() && fitted_beta.has_value(); }
};

/// Sorts points by size and checks positivity and strictly decreasing
/// throughput. Throws invalid_argument on violation.
inline HardwareProfile normalize_profile(HardwareProfile p) {
  std::sort(p.points.begin(), p.points.end(), [](const auto& a, const auto& b) { return a.params_m < b.params_m; });
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    const auto& pt = p.points[i];
    if (!(pt.params_m > 0.0) || !(pt.tokens_per_sec > 0.0)) fail(ErrorKind::invalid_argument, "profile points must be positive");
    if (i > 0 && !(pt.params_m > p.points[i - 1].params_m)) fail(ErrorKind::invalid_argument, "duplicate profile size");
    if (i > 0 && !(pt.tokens_per_sec < p.points[i - 1].tokens_per_sec)) {
      fail(ErrorKind::invalid_argument, "throughput must decrease strictly with size");
    }
  }
  if (p.vram_gb && !(*p.vram_gb > 0.0)) fail(ErrorKind::invalid_argument, "vram_gb must be positive");
  return p;
}

/// Log-log fit of throughput on size over the exact points (all points when
/// include_approximate is set).
inline ThroughputLaw fit_throughput(const HardwareProfile& profile, bool include_approximate = false) {
  std::vector<Point> pts;
  for (const auto& p : profile.points) {
    if (p.exact || include_approximate) pts.push_back({p.params_m, p.tokens_per_sec});
  }
  if (pts.size() < 2) fail(ErrorKind::insufficient_data, "throughput fit needs >= 2 points");
  const auto f = fit_power_law(pts);
  return ThroughputLaw{f.coeff_a, -f.exponent_alpha, f.r2, f.n_points};
}

inline HardwareProfile with_fit(HardwareProfile profile, bool include_approximate = false) {
  const auto law = fit_throughput(profile, include_approximate);
  profile.fitted_c = law.c;
  profile.fitted_beta = law.beta;
  return profile;
}

struct ThroughputEstimate {
  double tokens_per_sec = 0.0;
  bool extrapolated = false;
};

/// Inside the measured range: log-log interpolation between the bracketing
/// points (a measured size returns its measurement). Outside: the fitted law.
inline ThroughputEstimate throughput_at(const HardwareProfile& profile, double params_m) {
  if (!(params_m > 0.0)) fail(ErrorKind::domain, "params_m must be positive");
  const auto& pts = profile.points;
  if (!pts.empty() && params_m >= pts.front().params_m && params_m <= pts.back().params_m) {
    auto hi = std::lower_bound(pts.begin(), pts.end(), params_m,
                               [](const ThroughputPoint& p, double v) { return p.params_m < v; });
    if (hi->params_m == params_m) return {hi->tokens_per_sec, false};
    auto lo = hi - 1;
    const double w = (std::log(params_m) - std::log(lo->params_m)) / (std::log(hi->params_m) - std::log(lo->params_m));
    const double lt = std::log(lo->tokens_per_sec) + w * (std::log(hi->tokens_per_sec) - std::log(lo->tokens_per_sec));
    return {std::exp(lt), false};
  }
  if (!profile.fitted()) fail(ErrorKind::unfitted, "size outside measured range and profile has no fitted law");
  return {*profile.fitted_c * std::pow(params_m, -*profile.fitted_beta), true};
}

inline double tokens_processed(const HardwareProfile& profile, double params_m, double budget_min) {
  if (budget_min < 0.0) fail(ErrorKind::domain, "budget must be non-negative");
  return throughput_at(profile, params_m).tokens_per_sec * budget_min * 60.0;
}

inline double epochs(const HardwareProfile& profile, double params_m, double budget_min, double dataset_tokens) {
  if (!(dataset_tokens > 0.0)) fail(ErrorKind::invalid_argument, "dataset_tokens must be positive");
  return tokens_processed(profile, params_m, budget_min) / dataset_tokens;
}

/// Training FLOPs, 6 per parameter per token.
inline double flops(const HardwareProfile& profile, double params_m, double budget_min) {
  return 6.0 * params_m * 1e6 * tokens_processed(profile, params_m, budget_min);
}

/// Exponent of N in C ~ N^(1 - beta) * t.
inline double compute_scaling_exponent(const HardwareProfile& profile) {
  if (!profile.fitted_beta) fail(ErrorKind::unfitted, "profile has no fitted throughput law");
  return 1.0 - *profile.fitted_beta;
}

/// Single RTX 4090, measured throughput per depth 8..26. The D18, D22 and
/// D26 rows are approximate and excluded from the fit.
inline HardwareProfile rtx4090_profile() {
  HardwareProfile p;
  p.name = "rtx4090";
  p.vram_gb = 24.0;
  p.points = {
      {50.3, 428e3, true},  {85.9, 252e3, true}, {135.3, 160e3, true}, {200.9, 110e3, true}, {285.2, 78e3, true},
      {384.0, 56e3, false}, {519.0, 36e3, true}, {621.0, 27e3, false}, {855.6, 20e3, true}, {1031.0, 5e3, false},
  };
  return with_fit(normalize_profile(std::move(p)));
}

}  // namespace tcsl
