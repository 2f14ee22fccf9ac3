#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gpclt/hermite.hpp"
#include "gpclt/kernel.hpp"
#include "gpclt/sigma_models.hpp"

namespace gpclt {

enum class RegimeLabel {
  SubcriticalPower,     // h^r with (2-r)k < 1
  BrownianExact,        // r = 1
  CriticalLog,          // (2-r)k = 1, k >= 2
  SupercriticalLinear,  // (2-r)k > 1
  ConcaveRV,            // concave, regularly varying with positive index
  SlowlyVarying,        // ExpLog, LogPow
};
std::string to_string(RegimeLabel label);

/// Leading behavior of J_k(h) as h -> 0: constant * h^alpha * (log 1/h)^beta.
///
/// For SlowlyVarying the constant is 1 and only the shape of the rate is
/// claimed; use concave_sandwich for certified two-sided bounds.
struct AsymptoticJ {
  RegimeLabel regime = RegimeLabel::BrownianExact;
  int k = 1;
  double constant = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
  bool bounds_only = false;

  double rate(double h) const;
  double predicted(double h) const { return constant * rate(h); }
  std::string rate_text() const;
};

/// Regime label for J_k of the given family; depends only on (family, r, k).
RegimeLabel classify_regime(const IncrementVarianceSpec& spec, int k);

AsymptoticJ asymptotic_J(const IncrementVarianceSpec& spec, int k, Interval iv,
                         double tol = 1e-12);

/// int_0^inf |(|s+1|^r + |s-1|^r - 2 s^r) / 2|^k ds for (2-r)k > 1.
double eval_phi1_integral(double r, int k, double tol = 1e-12);

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Two-sided bounds on J_k(h) valid for concave sigma^2:
/// (c-h)/2^k * I <= J_k <= 6c(1 + 2^-k) * I with
/// I = int_0^h |1 - sigma^2(s)/sigma^2(h)|^k ds.
Bounds concave_sandwich(const IncrementVarianceSpec& spec, double h, int k, Interval iv,
                        double tol = 1e-13);

/// Leading-order predictor of Var I(f, h).
struct AsymptoticVariance {
  RegimeLabel regime = RegimeLabel::BrownianExact;
  std::string formula;
  // (a_{2m}^2, leading J_{2m}) pairs, summed in order.
  std::vector<std::pair<double, AsymptoticJ>> terms;
  // Slowly varying case: bounds come from the sandwich on J_{2k0}.
  double a2_lead = 0.0;
  double a2_total = 0.0;
  IncrementVarianceSpec spec;
  Interval interval;

  double eval(double h) const;
  std::optional<Bounds> bounds(double h) const;
};

AsymptoticVariance asymptotic_variance(const HermiteExpansion& fexp,
                                       const IncrementVarianceSpec& spec, Interval iv,
                                       double tol = 1e-12);

struct VarianceTerm {
  int m = 0;
  double a2 = 0.0;  // a_{2m}^2
  double J = 0.0;   // J_{2m}(h)
};

struct AsymptoticSummary {
  RegimeLabel regime = RegimeLabel::BrownianExact;
  double predicted = 0.0;
};

struct VarianceReport {
  double h = 0.0;
  double exact = 0.0;
  double tail_bound = 0.0;
  std::vector<VarianceTerm> terms;
  std::optional<AsymptoticSummary> asymptotic;
};

inline constexpr double kDefaultVarianceTol = 1e-10;

/// Var I(f, h) = sum_{m >= k0} a_{2m}^2 J_{2m}(h), summed in ascending m. The
/// sum stops once J_{2(m+1)}(h) times the remaining coefficient mass drops
/// below tol times the partial sum; that product is reported as tail_bound.
/// kernel_tol <= 0 picks an absolute quadrature target of 1e-9 (b-a) h.
VarianceReport exact_variance(const HermiteExpansion& fexp, const IncrementVarianceSpec& spec,
                              Interval iv, double h, double tol = kDefaultVarianceTol,
                              double kernel_tol = 0.0, bool with_asymptotic = true);

std::string to_json(const VarianceReport& report, int indent = 2);

}  // namespace gpclt
