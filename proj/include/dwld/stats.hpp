#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dwld/types.hpp"

namespace dwld {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion. Default z is the
/// two-sided 95% normal quantile.
inline WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials,
                                      double z = 1.959963984540054) {
  if (trials <= 0) throw InvalidParameterError("wilson_interval: trials must be positive");
  if (successes < 0 || successes > trials)
    throw InvalidParameterError("wilson_interval: successes out of range");
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = (z / denom) * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double exponential_cdf(double x, double mean) {
  if (x <= 0.0) return 0.0;
  return -std::expm1(-x / mean);
}

/// Kolmogorov distribution tail Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

/// One-sample two-sided KS statistic against a CDF given as a callable.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  if (samples.empty()) throw InvalidParameterError("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double above = (static_cast<double>(i) + 1.0) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max(d, std::max(above, below));
  }
  return d;
}

/// Asymptotic KS p-value (Stephens' correction).
inline double ks_pvalue(double d, std::size_t n_samples) {
  const double sqrt_n = std::sqrt(static_cast<double>(n_samples));
  return kolmogorov_q((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
}

/// Sample mean and standard error of the mean.
struct MeanStdError {
  double mean = 0.0;
  double std_error = 0.0;
};

inline MeanStdError mean_std_error(const std::vector<double>& values) {
  if (values.empty()) throw InvalidParameterError("mean_std_error: no values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace dwld
