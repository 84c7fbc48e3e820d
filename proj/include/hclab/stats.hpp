#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace hclab {

/// Monte Carlo estimate with its standard error.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

/// Sample mean and standard error of the mean.
Estimate mean_estimate(std::span<const double> values);
/// Frequency of `hits` among `n` trials with the binomial standard error.
Estimate binomial_estimate(std::size_t hits, std::size_t n);

inline double combined_se(double a, double b) { return std::sqrt(a * a + b * b); }
/// |a - b| in units of the combined standard error (0 when both are exact and equal).
double z_score(const Estimate& a, const Estimate& b);

/// P[N(0,1) > x].
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Least-squares line y = intercept + slope * x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace hclab
