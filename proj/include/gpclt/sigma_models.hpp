#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "gpclt/taylor.hpp"

namespace gpclt {

enum class SigmaFamily {
  Power,        // h^r, 0 < r <= 2
  ScaledPower,  // c0 * h^r
  ExpLog,       // exp(-(log 1/h)^gamma), 0 < gamma < 1
  LogPow,       // (log 1/h)^(-q), q > 0
};

/// One member of the catalog of increment-variance functions sigma^2(h).
///
/// `exponent` is r for the power families, gamma for ExpLog and q for LogPow.
/// `scale` is c0 and is 1 for every family except ScaledPower. `h_max` is the
/// upper end of the window on which the closed form is used.
struct IncrementVarianceSpec {
  SigmaFamily family = SigmaFamily::Power;
  double exponent = 1.0;
  double scale = 1.0;
  double h_max = 1.0;

  static IncrementVarianceSpec power(double r);
  static IncrementVarianceSpec scaled_power(double c0, double r);
  static IncrementVarianceSpec exp_log(double gamma);
  static IncrementVarianceSpec log_pow(double q);

  /// Power families keep their closed form beyond h_max; the others do not.
  bool extends_beyond_window() const {
    return family == SigmaFamily::Power || family == SigmaFamily::ScaledPower;
  }
  bool is_power() const { return extends_beyond_window(); }

  /// Throws DomainError when a parameter is outside its family's range.
  void validate() const;

  bool operator==(const IncrementVarianceSpec&) const = default;
};

double default_h_max(SigmaFamily family, double exponent);

/// sigma^2(h) for 0 < h <= h_max.
double eval_sigma2(const IncrementVarianceSpec& spec, double h);

/// d/dh sigma^2(h) for 0 < h <= h_max.
double eval_dsigma2(const IncrementVarianceSpec& spec, double h);

namespace detail {
// Unchecked closed form with sigma^2(0) = 0. Callers own the window check.
double sigma2(const IncrementVarianceSpec& spec, double h);
// Largest h on which the closed form may be evaluated at all.
double formula_limit(const IncrementVarianceSpec& spec);
}  // namespace detail

/// Taylor expansion of sigma^2(h0 + t) in t, for h0 > 0.
template <std::size_t N>
Taylor<N> sigma2_series(const IncrementVarianceSpec& spec, double h0) {
  const auto x = Taylor<N>::variable(h0);
  switch (spec.family) {
    case SigmaFamily::Power:
    case SigmaFamily::ScaledPower:
      return spec.scale * pow(x, spec.exponent);
    case SigmaFamily::ExpLog:
      return exp(-pow(-log(x), spec.exponent));
    case SigmaFamily::LogPow:
      return pow(-log(x), -spec.exponent);
  }
  return {};
}

struct StructureReport {
  bool concave = false;
  // Largest h such that sigma^2 is concave on (0, h]; 0 when no such h was found.
  double concave_upper = 0.0;
  double rv_index = 0.0;
  bool slowly_varying = false;
  std::optional<double> power_exponent;
};

StructureReport classify(const IncrementVarianceSpec& spec);

/// Parses `pow:<r>`, `spow:<c0>:<r>`, `explog:<gamma>`, `logpow:<q>`, each
/// optionally followed by `@hmax=<v>`.
IncrementVarianceSpec parse_sigma_spec(std::string_view text);
std::string to_string(const IncrementVarianceSpec& spec);

}  // namespace gpclt
