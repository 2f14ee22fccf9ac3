#pragma once

#include <span>

namespace gpclt {

/// Sum by a fixed binary tree over the input order; the result depends only
/// on the values and their order.
double pairwise_sum(std::span<const double> x);

/// Standard normal distribution function.
double normal_cdf(double x);

/// P(sqrt(n) D_n > lambda) in the large-n limit (Kolmogorov distribution).
double ks_pvalue(double lambda);

struct KsResult {
  double D = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against the standard normal law.
/// Requires at least 8 finite samples.
KsResult ks_test(std::span<const double> samples);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
  double skewness_se = 0.0;
  double excess_kurtosis_se = 0.0;
};

/// Sample moments with large-sample standard errors. Requires n >= 2.
Moments moments(std::span<const double> x);

}  // namespace gpclt
