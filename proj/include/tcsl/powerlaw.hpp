#pragma once

// Log-log least squares for y = a * x^alpha, with a percentile bootstrap for
// the exponent.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tcsl/domain.hpp"
#include "tcsl/error.hpp"
#include "tcsl/stats.hpp"

namespace tcsl {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class TieMode { arithmetic_mean, pick_larger, pick_smaller, exclude_budget };

struct TiePolicy {
  TieMode mode = TieMode::arithmetic_mean;
  // Half of the last printed BPB digit.
  double epsilon_bpb = 0.0005;

  static TiePolicy make(TieMode mode, double epsilon_bpb = 0.0005) {
    if (!(epsilon_bpb >= 0.0 && epsilon_bpb < 0.01)) {
      fail(ErrorKind::invalid_argument, "tie epsilon must lie in [0, 0.01)");
    }
    return TiePolicy{mode, epsilon_bpb};
  }
};

inline std::string to_string(TieMode mode) {
  switch (mode) {
    case TieMode::arithmetic_mean: return "mean";
    case TieMode::pick_larger: return "larger";
    case TieMode::pick_smaller: return "smaller";
    case TieMode::exclude_budget: return "exclude";
  }
  return "mean";
}

inline TieMode parse_tie_mode(const std::string& s) {
  if (s == "mean" || s == "arithmetic_mean") return TieMode::arithmetic_mean;
  if (s == "larger" || s == "pick_larger") return TieMode::pick_larger;
  if (s == "smaller" || s == "pick_smaller") return TieMode::pick_smaller;
  if (s == "exclude" || s == "exclude_budget") return TieMode::exclude_budget;
  fail(ErrorKind::invalid_argument, "unknown tie mode '" + s + "'");
}

inline PowerLawFit fit_power_law(std::span<const Point> points, std::string x_unit = {}, std::string y_unit = {}) {
  const auto n = points.size();
  if (n < 2) fail(ErrorKind::insufficient_data, "power-law fit needs at least 2 points");
  std::set<double> distinct_x;
  for (const auto& p : points) {
    if (!(p.x > 0.0) || !(p.y > 0.0) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
      fail(ErrorKind::domain, "power-law fit requires finite positive x and y");
    }
    distinct_x.insert(p.x);
  }
  if (distinct_x.size() < 2) fail(ErrorKind::singular_fit, "all x values coincide");

  const double dn = static_cast<double>(n);
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += std::log(p.x);
    my += std::log(p.y);
  }
  mx /= dn;
  my /= dn;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(p.x) - mx;
    const double dy = std::log(p.y) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (const auto& p : points) {
    const double r = std::log(p.y) - (intercept + slope * std::log(p.x));
    ssr += r * r;
  }

  PowerLawFit fit;
  fit.coeff_a = std::exp(intercept);
  fit.exponent_alpha = slope;
  fit.n_points = static_cast<int>(n);
  fit.x_unit = std::move(x_unit);
  fit.y_unit = std::move(y_unit);
  fit.x_min = *distinct_x.begin();
  fit.x_max = *distinct_x.rbegin();
  // Relative guard: syy below rounding noise of the logs counts as constant.
  if (syy <= 1e-24 * std::max(1.0, my * my) * dn) {
    fit.r2 = std::nan("");
    fit.r2_undefined = true;
  } else {
    fit.r2 = 1.0 - ssr / syy;
  }
  if (n == 2) {
    fit.stderr_alpha = std::numeric_limits<double>::infinity();
    fit.ci95_low = -std::numeric_limits<double>::infinity();
    fit.ci95_high = std::numeric_limits<double>::infinity();
    fit.ci_degenerate = true;
  } else {
    const double dof = dn - 2.0;
    fit.stderr_alpha = std::sqrt(ssr / dof / sxx);
    const double half = stats::t_quantile(0.975, dof) * fit.stderr_alpha;
    fit.ci95_low = slope - half;
    fit.ci95_high = slope + half;
  }
  return fit;
}

inline PowerLawFit fit_power_law(const std::vector<Point>& points, std::string x_unit = {}, std::string y_unit = {}) {
  return fit_power_law(std::span<const Point>(points), std::move(x_unit), std::move(y_unit));
}

inline double evaluate(const PowerLawFit& fit, double x) {
  if (!(x > 0.0)) fail(ErrorKind::domain, "power law evaluated at non-positive x");
  return fit.coeff_a * std::pow(x, fit.exponent_alpha);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Generator for bootstrap resample i; independent of evaluation order.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 1)));
}

}  // namespace detail

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Percentile bootstrap (2.5%, 97.5%) of the fitted exponent. Each resample
/// draws n indices with replacement from its own substream; draws with fewer
/// than two distinct x values are redrawn from the same substream.
inline Interval bootstrap_ci(std::span<const Point> points, int resamples, std::uint64_t seed) {
  if (resamples < 100) fail(ErrorKind::invalid_argument, "bootstrap needs at least 100 resamples");
  if (points.size() < 3) fail(ErrorKind::invalid_argument, "bootstrap needs at least 3 points");
  (void)fit_power_law(points);  // validates domain and distinct x

  const auto n = points.size();
  std::vector<double> alphas(static_cast<std::size_t>(resamples));
  std::vector<Point> sample(n);
  for (int i = 0; i < resamples; ++i) {
    auto rng = detail::substream(seed, static_cast<std::uint64_t>(i));
    for (;;) {
      std::set<double> xs;
      for (auto& s : sample) {
        s = points[rng() % n];
        xs.insert(s.x);
      }
      if (xs.size() >= 2) break;
    }
    alphas[static_cast<std::size_t>(i)] = fit_power_law(std::span<const Point>(sample)).exponent_alpha;
  }
  return Interval{stats::percentile(alphas, 0.025), stats::percentile(alphas, 0.975)};
}

inline Interval bootstrap_ci(const std::vector<Point>& points, int resamples, std::uint64_t seed) {
  return bootstrap_ci(std::span<const Point>(points), resamples, seed);
}

}  // namespace tcsl
