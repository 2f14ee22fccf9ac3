#include "gpclt/sigma_models.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gpclt/errors.hpp"
#include "gpclt/text.hpp"

namespace gpclt {

namespace {

constexpr double kExpLogLogPowHMax = 0.1353352832366127;  // e^-2

double log_inv(double h) { return -std::log(h); }

}  // namespace

double default_h_max(SigmaFamily family, double exponent) {
  switch (family) {
    case SigmaFamily::Power:
    case SigmaFamily::ScaledPower:
      return 1.0;
    case SigmaFamily::ExpLog:
      return kExpLogLogPowHMax;
    case SigmaFamily::LogPow:
      // (log 1/h)^-q is concave only where log 1/h >= q + 1.
      return std::min(kExpLogLogPowHMax, std::exp(-(exponent + 1.0)));
  }
  return 1.0;
}

IncrementVarianceSpec IncrementVarianceSpec::power(double r) {
  IncrementVarianceSpec s{SigmaFamily::Power, r, 1.0, default_h_max(SigmaFamily::Power, r)};
  s.validate();
  return s;
}

IncrementVarianceSpec IncrementVarianceSpec::scaled_power(double c0, double r) {
  IncrementVarianceSpec s{SigmaFamily::ScaledPower, r, c0,
                          default_h_max(SigmaFamily::ScaledPower, r)};
  s.validate();
  return s;
}

IncrementVarianceSpec IncrementVarianceSpec::exp_log(double gamma) {
  IncrementVarianceSpec s{SigmaFamily::ExpLog, gamma, 1.0,
                          default_h_max(SigmaFamily::ExpLog, gamma)};
  s.validate();
  return s;
}

IncrementVarianceSpec IncrementVarianceSpec::log_pow(double q) {
  IncrementVarianceSpec s{SigmaFamily::LogPow, q, 1.0, default_h_max(SigmaFamily::LogPow, q)};
  s.validate();
  return s;
}

void IncrementVarianceSpec::validate() const {
  auto fail = [](const std::string& msg) { throw DomainError(msg); };
  if (!(h_max > 0.0) || !std::isfinite(h_max)) fail("hmax must be > 0");
  switch (family) {
    case SigmaFamily::ScaledPower:
      if (!(scale > 0.0) || !std::isfinite(scale)) fail("spow scale c0 must be > 0");
      [[fallthrough]];
    case SigmaFamily::Power:
      if (!(exponent > 0.0)) fail("power exponent r must be > 0");
      if (!(exponent <= 2.0)) fail("power exponent r must be <= 2");
      break;
    case SigmaFamily::ExpLog:
      if (!(exponent > 0.0)) fail("explog gamma must be > 0");
      if (!(exponent < 1.0)) fail("explog gamma must be < 1");
      if (!(h_max < 1.0)) fail("explog hmax must be < 1");
      break;
    case SigmaFamily::LogPow:
      if (!(exponent > 0.0) || !std::isfinite(exponent)) fail("logpow q must be > 0");
      if (!(h_max < 1.0)) fail("logpow hmax must be < 1");
      break;
  }
}

namespace detail {

double formula_limit(const IncrementVarianceSpec& spec) {
  return spec.extends_beyond_window() ? std::numeric_limits<double>::infinity()
                                      : spec.h_max;
}

double sigma2(const IncrementVarianceSpec& spec, double h) {
  if (h <= 0.0) return 0.0;
  switch (spec.family) {
    case SigmaFamily::Power:
    case SigmaFamily::ScaledPower:
      return spec.scale * std::pow(h, spec.exponent);
    case SigmaFamily::ExpLog:
      return std::exp(-std::pow(log_inv(h), spec.exponent));
    case SigmaFamily::LogPow:
      return std::pow(log_inv(h), -spec.exponent);
  }
  return 0.0;
}

}  // namespace detail

namespace {

void check_window(const IncrementVarianceSpec& spec, double h) {
  if (!(h > 0.0)) throw DomainError("h must be > 0, got " + text::shortest(h));
  if (h > spec.h_max) {
    throw DomainError("h = " + text::shortest(h) + " exceeds hmax = " +
                      text::shortest(spec.h_max));
  }
}

}  // namespace

double eval_sigma2(const IncrementVarianceSpec& spec, double h) {
  check_window(spec, h);
  return detail::sigma2(spec, h);
}

double eval_dsigma2(const IncrementVarianceSpec& spec, double h) {
  check_window(spec, h);
  const double r = spec.exponent;
  switch (spec.family) {
    case SigmaFamily::Power:
    case SigmaFamily::ScaledPower:
      return spec.scale * r * std::pow(h, r - 1.0);
    case SigmaFamily::ExpLog: {
      const double L = log_inv(h);
      return detail::sigma2(spec, h) * r * std::pow(L, r - 1.0) / h;
    }
    case SigmaFamily::LogPow: {
      const double L = log_inv(h);
      return r * std::pow(L, -r - 1.0) / h;
    }
  }
  return 0.0;
}

StructureReport classify(const IncrementVarianceSpec& spec) {
  spec.validate();
  StructureReport rep;
  switch (spec.family) {
    case SigmaFamily::Power:
    case SigmaFamily::ScaledPower:
      rep.rv_index = spec.exponent;
      rep.power_exponent = spec.exponent;
      rep.slowly_varying = false;
      rep.concave = spec.exponent <= 1.0;
      rep.concave_upper = rep.concave ? spec.h_max : 0.0;
      return rep;
    case SigmaFamily::ExpLog:
    case SigmaFamily::LogPow:
      break;
  }
  rep.rv_index = 0.0;
  rep.slowly_varying = true;

  // Numerical certificate: sign of sigma^2'' on a log-spaced grid reaching
  // 2^-60 * h_max.
  constexpr int kPoints = 10000;
  const double lo = std::log(spec.h_max) - 60.0 * std::log(2.0);
  const double hi = std::log(spec.h_max);
  double upper = 0.0;
  bool ok = true;
  for (int i = 0; i < kPoints; ++i) {
    const double h = std::exp(lo + (hi - lo) * i / (kPoints - 1));
    const auto series = sigma2_series<2>(spec, std::min(h, spec.h_max));
    if (series[2] > 0.0) {
      ok = false;
      break;
    }
    upper = h;
  }
  rep.concave = ok;
  rep.concave_upper = upper;
  return rep;
}

IncrementVarianceSpec parse_sigma_spec(std::string_view text) {
  std::string_view body = text;
  std::optional<double> hmax;
  if (const auto at = text.find('@'); at != std::string_view::npos) {
    body = text.substr(0, at);
    const auto suffix = text.substr(at + 1);
    constexpr std::string_view key = "hmax=";
    if (suffix.substr(0, key.size()) != key) {
      throw ParseError("unknown sigma spec suffix '" + std::string(suffix) +
                       "' (expected @hmax=<v>)");
    }
    hmax = text::parse_double(suffix.substr(key.size()), "hmax");
  }
  const auto parts = text::split(body, ':');
  const auto& tag = parts[0];
  auto expect_args = [&](std::size_t n) {
    if (parts.size() != n + 1) {
      throw ParseError("sigma spec '" + std::string(text) + "' expects " +
                       std::to_string(n) + " parameter(s)");
    }
  };
  IncrementVarianceSpec spec;
  if (tag == "pow") {
    expect_args(1);
    spec = {SigmaFamily::Power, text::parse_double(parts[1], "r"), 1.0, 0.0};
  } else if (tag == "spow") {
    expect_args(2);
    spec = {SigmaFamily::ScaledPower, text::parse_double(parts[2], "r"),
            text::parse_double(parts[1], "c0"), 0.0};
  } else if (tag == "explog") {
    expect_args(1);
    spec = {SigmaFamily::ExpLog, text::parse_double(parts[1], "gamma"), 1.0, 0.0};
  } else if (tag == "logpow") {
    expect_args(1);
    spec = {SigmaFamily::LogPow, text::parse_double(parts[1], "q"), 1.0, 0.0};
  } else {
    throw ParseError("unknown sigma family '" + std::string(tag) + "'");
  }
  spec.h_max = hmax.value_or(default_h_max(spec.family, spec.exponent));
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ParseError("sigma spec '" + std::string(text) + "': " + e.what());
  }
  return spec;
}

std::string to_string(const IncrementVarianceSpec& spec) {
  std::string out;
  switch (spec.family) {
    case SigmaFamily::Power:
      out = "pow:" + text::shortest(spec.exponent);
      break;
    case SigmaFamily::ScaledPower:
      out = "spow:" + text::shortest(spec.scale) + ":" + text::shortest(spec.exponent);
      break;
    case SigmaFamily::ExpLog:
      out = "explog:" + text::shortest(spec.exponent);
      break;
    case SigmaFamily::LogPow:
      out = "logpow:" + text::shortest(spec.exponent);
      break;
  }
  if (spec.h_max != default_h_max(spec.family, spec.exponent)) {
    out += "@hmax=" + text::shortest(spec.h_max);
  }
  return out;
}

}  // namespace gpclt
