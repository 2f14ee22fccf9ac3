#include "gpclt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "gpclt/errors.hpp"

namespace gpclt {

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_pvalue(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  constexpr double kTermFloor = 1e-12;
  double p;
  if (lambda < 1.18) {
    // Dual series for the distribution function, fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int j = 1; j <= 100; ++j) {
      const double t = std::exp(-(2.0 * j - 1.0) * (2.0 * j - 1.0) * pi2 / (8.0 * lambda * lambda));
      cdf += t;
      if (t < kTermFloor) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    p = 1.0 - cdf;
  } else {
    p = 0.0;
    for (int j = 1; j <= 100; ++j) {
      const double t = std::exp(-2.0 * j * j * lambda * lambda);
      p += (j % 2 == 1 ? 2.0 : -2.0) * t;
      if (t < kTermFloor) break;
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> samples) {
  if (samples.size() < 8) {
    throw DomainError("KS test needs at least 8 samples, got " + std::to_string(samples.size()));
  }
  std::vector<double> x(samples.begin(), samples.end());
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError("KS test sample is not finite");
  }
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double D = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = normal_cdf(x[i]);
    D = std::max({D, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
  }
  return {D, ks_pvalue(std::sqrt(n) * D)};
}

Moments moments(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("moments need at least 2 samples");
  const double n = static_cast<double>(x.size());
  const double mean = pairwise_sum(x) / n;
  std::vector<double> d2(x.size()), d3(x.size()), d4(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean;
    d2[i] = d * d;
    d3[i] = d2[i] * d;
    d4[i] = d2[i] * d2[i];
  }
  const double m2 = pairwise_sum(d2) / n;
  const double m3 = pairwise_sum(d3) / n;
  const double m4 = pairwise_sum(d4) / n;
  Moments out;
  out.mean = mean;
  out.variance = m2 * n / (n - 1.0);
  out.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  out.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  out.mean_se = std::sqrt(out.variance / n);
  out.variance_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  out.skewness_se = std::sqrt(6.0 / n);
  out.excess_kurtosis_se = std::sqrt(24.0 / n);
  return out;
}

}  // namespace gpclt
