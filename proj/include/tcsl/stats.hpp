#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "tcsl/error.hpp"

namespace tcsl::stats {

/// Two-sided Student-t critical value, e.g. p = 0.975 for a 95% interval.
inline double t_quantile(double p, double dof) {
  if (!(dof > 0.0)) return std::numeric_limits<double>::infinity();
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, p);
}

inline double mean(std::span<const double> v) {
  if (v.empty()) fail(ErrorKind::insufficient_data, "mean of empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// ddof = 1 gives the sample standard deviation, ddof = 0 the population one.
inline double stddev(std::span<const double> v, int ddof) {
  if (static_cast<int>(v.size()) <= ddof) fail(ErrorKind::insufficient_data, "not enough values for stddev");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(static_cast<int>(v.size()) - ddof));
}

/// Linear-interpolation percentile (the common "type 7" definition), q in [0, 1].
inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) fail(ErrorKind::insufficient_data, "percentile of empty sample");
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace tcsl::stats
