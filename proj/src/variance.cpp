#include "gpclt/variance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "gpclt/errors.hpp"
#include "gpclt/quadrature.hpp"
#include "gpclt/text.hpp"

namespace gpclt {

namespace {

constexpr double kCriticalSlack = 1e-12;

double log_inv(double h) { return std::log(1.0 / h); }

}  // namespace

std::string to_string(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::SubcriticalPower:
      return "SubcriticalPower";
    case RegimeLabel::BrownianExact:
      return "BrownianExact";
    case RegimeLabel::CriticalLog:
      return "CriticalLog";
    case RegimeLabel::SupercriticalLinear:
      return "SupercriticalLinear";
    case RegimeLabel::ConcaveRV:
      return "ConcaveRV";
    case RegimeLabel::SlowlyVarying:
      return "SlowlyVarying";
  }
  return "unknown";
}

double AsymptoticJ::rate(double h) const {
  double v = std::pow(h, alpha);
  if (beta != 0.0) v *= std::pow(log_inv(h), beta);
  return v;
}

std::string AsymptoticJ::rate_text() const {
  std::string out = alpha == 1.0 ? "h" : "h^" + text::shortest(alpha);
  if (alpha == 0.0) out = "1";
  if (beta == 1.0) {
    out += "*log(1/h)";
  } else if (beta != 0.0) {
    out += "*log(1/h)^" + text::shortest(beta);
  }
  return out;
}

RegimeLabel classify_regime(const IncrementVarianceSpec& spec, int k) {
  spec.validate();
  if (k < 1) throw DomainError("moment order k must be >= 1");
  if (!spec.is_power()) return RegimeLabel::SlowlyVarying;
  const double r = spec.exponent;
  if (r == 1.0) return RegimeLabel::BrownianExact;
  const double t = (2.0 - r) * k;
  if (std::abs(t - 1.0) <= kCriticalSlack && k >= 2) return RegimeLabel::CriticalLog;
  if (t < 1.0) return RegimeLabel::SubcriticalPower;
  return RegimeLabel::SupercriticalLinear;
}

double eval_phi1_integral(double r, int k, double tol) {
  if (!(r > 0.0 && r < 2.0)) throw DomainError("r must lie in (0, 2)");
  if (k < 1) throw DomainError("k must be >= 1");
  const double t = (2.0 - r) * k;
  if (!(t > 1.0)) {
    throw DomainError("integral of |phi_1|^k diverges when (2-r)k <= 1 (r = " +
                      text::shortest(r) + ", k = " + std::to_string(k) + ")");
  }
  if (!(tol > 0.0)) throw DomainError("tol must be > 0");
  const auto spec = IncrementVarianceSpec::power(r);
  // Far out phi_1(s) ~ A s^(r-2) with A = r(r-1)/2.
  const double A = std::abs(r * (r - 1.0) / 2.0);
  const double Ak = std::pow(A, k);
  double S = 16.0;
  if (Ak > 0.0) S = std::max(S, std::pow(Ak / tol, 1.0 / t));
  std::vector<double> br{0.0, 1.0};
  for (double x = 2.0; x < S; x *= 2.0) br.push_back(x);
  br.push_back(S);
  auto integrand = [&](double s) { return std::pow(std::abs(phi(spec, 1.0, s)), k); };
  quad::Options opt;
  opt.abs_tol = tol;
  const auto res = quad::integrate(integrand, std::span<const double>(br), opt);
  const double tail = Ak * std::pow(S, 1.0 - t) / (t - 1.0);
  return res.value + tail;
}

AsymptoticJ asymptotic_J(const IncrementVarianceSpec& spec, int k, Interval iv, double tol) {
  if (!(iv.b > iv.a)) throw DomainError("interval requires a < b");
  const double c = iv.length();
  AsymptoticJ out;
  out.k = k;
  out.regime = classify_regime(spec, k);
  const double r = spec.exponent;
  switch (out.regime) {
    case RegimeLabel::BrownianExact:
      out.constant = 2.0 * c / (k + 1.0);
      break;
    case RegimeLabel::SubcriticalPower: {
      const double e = (r - 2.0) * k;
      out.constant = 2.0 * std::pow(r, k) * std::pow(std::abs(r - 1.0), k) * std::pow(c, e + 2.0) /
                     (std::pow(2.0, k) * (e + 1.0) * (e + 2.0));
      out.alpha = (2.0 - r) * k;
      break;
    }
    case RegimeLabel::CriticalLog:
      out.constant = 2.0 * c * std::pow(std::abs(r * (r - 1.0) / 2.0), k);
      out.beta = 1.0;
      break;
    case RegimeLabel::SupercriticalLinear:
      out.constant = 2.0 * c * eval_phi1_integral(r, k, tol);
      break;
    case RegimeLabel::ConcaveRV:
      out.constant = 1.0;
      out.bounds_only = true;
      break;
    case RegimeLabel::SlowlyVarying:
      out.constant = 1.0;
      out.bounds_only = true;
      out.beta = spec.family == SigmaFamily::ExpLog ? -k * (1.0 - r) : -static_cast<double>(k);
      break;
  }
  return out;
}

Bounds concave_sandwich(const IncrementVarianceSpec& spec, double h, int k, Interval iv,
                        double tol) {
  spec.validate();
  if (k < 1) throw DomainError("moment order k must be >= 1");
  const double c = iv.length();
  if (!(h > 0.0 && h < c)) throw DomainError("need 0 < h < b - a");
  const double s2h = eval_sigma2(spec, h);
  // The integrand tends to 1 at 0 with an unbounded derivative; a dyadic
  // ladder toward 0 keeps the panels honest.
  std::vector<double> br{0.0};
  for (int j = 60; j >= 1; --j) br.push_back(std::ldexp(h, -j));
  br.push_back(h);
  auto integrand = [&](double s) {
    const double ratio = s == 0.0 ? 0.0 : detail::sigma2(spec, s) / s2h;
    return std::pow(std::abs(1.0 - ratio), k);
  };
  quad::Options opt;
  opt.abs_tol = tol * h;
  const double I = quad::integrate(integrand, std::span<const double>(br), opt).value;
  const double two_k = std::pow(2.0, k);
  return {(c - h) / two_k * I, 6.0 * c * (1.0 + 1.0 / two_k) * I};
}

double AsymptoticVariance::eval(double h) const {
  double sum = 0.0;
  for (const auto& [a2, aj] : terms) sum += a2 * aj.predicted(h);
  return sum;
}

std::optional<Bounds> AsymptoticVariance::bounds(double h) const {
  if (regime != RegimeLabel::SlowlyVarying && regime != RegimeLabel::ConcaveRV) return std::nullopt;
  const auto b = concave_sandwich(spec, h, terms.front().second.k, interval);
  return Bounds{a2_lead * b.lower, a2_total * b.upper};
}

AsymptoticVariance asymptotic_variance(const HermiteExpansion& fexp,
                                       const IncrementVarianceSpec& spec, Interval iv,
                                       double tol) {
  if (fexp.k0 < 1) throw DomainError("k0 undefined");
  const int k_lead = 2 * fexp.k0;
  AsymptoticVariance out;
  out.spec = spec;
  out.interval = iv;
  out.regime = classify_regime(spec, k_lead);
  out.a2_lead = fexp.a(fexp.k0) * fexp.a(fexp.k0);
  out.a2_total = fexp.tail_l2;
  for (int m = fexp.k0; m <= fexp.max_index(); ++m) out.a2_total += fexp.a(m) * fexp.a(m);

  switch (out.regime) {
    case RegimeLabel::SubcriticalPower:
      throw UnsupportedRegimeError(
          "J_" + std::to_string(k_lead) + " is subcritical for " + to_string(spec) +
          ": the variance is not dominated by a Gaussian-limit term");
    case RegimeLabel::CriticalLog:
    case RegimeLabel::ConcaveRV:
    case RegimeLabel::SlowlyVarying: {
      const auto aj = asymptotic_J(spec, k_lead, iv, tol);
      out.terms.emplace_back(out.a2_lead, aj);
      out.formula = "a_" + std::to_string(k_lead) + "^2 * " +
                    (aj.bounds_only ? std::string("") : text::shortest(aj.constant) + " * ") +
                    aj.rate_text();
      return out;
    }
    case RegimeLabel::BrownianExact:
    case RegimeLabel::SupercriticalLinear:
      break;
  }

  // Every J_{2m}, m >= k0, has rate h: sum the leading constants with the
  // same stopping rule as the exact series (constants decrease in m).
  double remaining = out.a2_total;
  double partial = 0.0;
  for (int m = fexp.k0; m <= fexp.max_index(); ++m) {
    const double a2 = fexp.a(m) * fexp.a(m);
    const auto aj = asymptotic_J(spec, 2 * m, iv, tol);
    out.terms.emplace_back(a2, aj);
    partial += a2 * aj.constant;
    remaining -= a2;
    if (m == fexp.max_index()) break;
    if (aj.constant * std::max(remaining, 0.0) < kDefaultVarianceTol * partial) break;
  }
  out.formula = text::shortest(partial) + " * h";
  return out;
}

VarianceReport exact_variance(const HermiteExpansion& fexp, const IncrementVarianceSpec& spec,
                              Interval iv, double h, double tol, double kernel_tol,
                              bool with_asymptotic) {
  if (fexp.k0 < 1) throw DomainError("k0 undefined");
  if (!(tol > 0.0)) throw DomainError("tol must be > 0");
  const double ktol = kernel_tol > 0.0 ? kernel_tol : 1e-9 * iv.length() * h;

  VarianceReport rep;
  rep.h = h;
  double remaining = fexp.tail_l2;
  for (int m = fexp.k0; m <= fexp.max_index(); ++m) remaining += fexp.a(m) * fexp.a(m);

  double J = moment_J(spec, h, 2 * fexp.k0, iv, ktol).value;
  double partial = 0.0;
  for (int m = fexp.k0;; ++m) {
    const double a2 = fexp.a(m) * fexp.a(m);
    rep.terms.push_back({m, a2, J});
    partial += a2 * J;
    remaining = std::max(0.0, remaining - a2);
    // J_{2(m+1)} <= J_{2m}, and the bound for the rest uses the next one.
    const double J_next = moment_J(spec, h, 2 * (m + 1), iv, ktol).value;
    const double bound = J_next * remaining;
    if (m == fexp.max_index() || bound < tol * partial) {
      rep.tail_bound = bound;
      break;
    }
    J = J_next;
  }
  rep.exact = partial;

  if (with_asymptotic) {
    try {
      const auto av = asymptotic_variance(fexp, spec, iv);
      rep.asymptotic = AsymptoticSummary{av.regime, av.eval(h)};
    } catch (const UnsupportedRegimeError&) {
    }
  }
  return rep;
}

std::string to_json(const VarianceReport& report, int indent) {
  nlohmann::ordered_json j;
  j["h"] = report.h;
  j["exact"] = report.exact;
  j["tail_bound"] = report.tail_bound;
  auto terms = nlohmann::ordered_json::array();
  for (const auto& t : report.terms) terms.push_back({t.m, t.a2, t.J});
  j["terms"] = terms;
  if (report.asymptotic) {
    j["asymptotic"] = {{"regime", to_string(report.asymptotic->regime)},
                       {"predicted", report.asymptotic->predicted}};
  } else {
    j["asymptotic"] = nullptr;
  }
  return j.dump(indent);
}

}  // namespace gpclt
