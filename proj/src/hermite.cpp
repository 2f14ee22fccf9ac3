#include "gpclt/hermite.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "gpclt/errors.hpp"
#include "gpclt/quadrature.hpp"
#include "gpclt/text.hpp"

namespace gpclt {

namespace {

// (2n-1)!! = E eta^{2n}, with (-1)!! = 1.
double double_factorial_odd(int n) {
  double r = 1.0;
  for (int i = 1; i <= n; ++i) r *= 2.0 * i - 1.0;
  return r;
}

}  // namespace

FunctionSpec FunctionSpec::abs_pow(double p) {
  FunctionSpec f;
  f.kind = FunctionKind::AbsPow;
  f.p = p;
  f.validate();
  return f;
}

FunctionSpec FunctionSpec::hermite(int even_order) {
  FunctionSpec f;
  f.kind = FunctionKind::HermiteSingle;
  f.order = even_order;
  f.validate();
  return f;
}

FunctionSpec FunctionSpec::even_poly(std::vector<double> coeffs) {
  FunctionSpec f;
  f.kind = FunctionKind::EvenPoly;
  f.poly_coeffs = std::move(coeffs);
  f.validate();
  return f;
}

FunctionSpec FunctionSpec::one() { return FunctionSpec{}; }

void FunctionSpec::validate() const {
  switch (kind) {
    case FunctionKind::AbsPow:
      if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("abspow exponent p must be >= 1");
      break;
    case FunctionKind::HermiteSingle:
      if (order < 0 || order % 2 != 0) throw DomainError("herm order must be even and >= 0");
      if (order > kMaxHermiteDegree) {
        throw DomainError("herm order must be <= " + std::to_string(kMaxHermiteDegree));
      }
      break;
    case FunctionKind::EvenPoly:
      if (poly_coeffs.empty()) throw DomainError("poly needs at least one coefficient");
      break;
    case FunctionKind::Indicator:
      break;
  }
}

double FunctionSpec::operator()(double x) const {
  switch (kind) {
    case FunctionKind::AbsPow:
      return std::pow(std::abs(x), p);
    case FunctionKind::HermiteSingle:
      return hermite_eval(order, x);
    case FunctionKind::EvenPoly: {
      const double x2 = x * x;
      double acc = 0.0;
      for (auto it = poly_coeffs.rbegin(); it != poly_coeffs.rend(); ++it) acc = acc * x2 + *it;
      return acc;
    }
    case FunctionKind::Indicator:
      return 1.0;
  }
  return 0.0;
}

FunctionSpec parse_function_spec(std::string_view text) {
  try {
    if (text == "one") return FunctionSpec::one();
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError("unknown function spec '" + std::string(text) + "'");
    }
    const auto tag = text.substr(0, colon);
    const auto body = text.substr(colon + 1);
    if (tag == "abspow") return FunctionSpec::abs_pow(text::parse_double(body, "p"));
    if (tag == "herm") {
      return FunctionSpec::hermite(static_cast<int>(text::parse_integer(body, "2m")));
    }
    if (tag == "poly") {
      std::vector<double> coeffs;
      for (auto tok : text::split(body, ',')) coeffs.push_back(text::parse_double(tok, "coefficient"));
      return FunctionSpec::even_poly(std::move(coeffs));
    }
    throw ParseError("unknown function kind '" + std::string(tag) + "'");
  } catch (const DomainError& e) {
    throw ParseError("function spec '" + std::string(text) + "': " + e.what());
  }
}

std::string to_string(const FunctionSpec& f) {
  switch (f.kind) {
    case FunctionKind::AbsPow:
      return "abspow:" + text::shortest(f.p);
    case FunctionKind::HermiteSingle:
      return "herm:" + std::to_string(f.order);
    case FunctionKind::EvenPoly: {
      std::string out = "poly:";
      for (std::size_t i = 0; i < f.poly_coeffs.size(); ++i) {
        if (i) out += ',';
        out += text::shortest(f.poly_coeffs[i]);
      }
      return out;
    }
    case FunctionKind::Indicator:
      return "one";
  }
  return "one";
}

double hermite_eval(int m, double x) {
  if (m < 0 || m > kMaxHermiteDegree) {
    throw DomainError("Hermite degree must be in [0, " + std::to_string(kMaxHermiteDegree) + "]");
  }
  double prev = 1.0;
  if (m == 0) return prev;
  double cur = x;
  for (int n = 1; n < m; ++n) {
    const double next = (x * cur - std::sqrt(static_cast<double>(n)) * prev) /
                        std::sqrt(static_cast<double>(n + 1));
    prev = cur;
    cur = next;
  }
  if (!std::isfinite(cur)) {
    throw OverflowError("h_" + std::to_string(m) + "(" + text::shortest(x) +
                        ") exceeds the double range");
  }
  return cur;
}

double hermite_function(int m, double x) {
  if (m < 0 || m > kMaxHermiteDegree) {
    throw DomainError("Hermite degree must be in [0, " + std::to_string(kMaxHermiteDegree) + "]");
  }
  double prev = std::exp(-0.25 * x * x);
  if (m == 0) return prev;
  double cur = x * prev;
  for (int n = 1; n < m; ++n) {
    const double next = (x * cur - std::sqrt(static_cast<double>(n)) * prev) /
                        std::sqrt(static_cast<double>(n + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

double abs_moment(double p) {
  return std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1.0)) / std::sqrt(std::numbers::pi);
}

double expectation_f(const FunctionSpec& f) {
  switch (f.kind) {
    case FunctionKind::AbsPow:
      return abs_moment(f.p);
    case FunctionKind::HermiteSingle:
      return f.order == 0 ? 1.0 : 0.0;
    case FunctionKind::EvenPoly: {
      double acc = 0.0;
      for (std::size_t j = 0; j < f.poly_coeffs.size(); ++j) {
        acc += f.poly_coeffs[j] * double_factorial_odd(static_cast<int>(j));
      }
      return acc;
    }
    case FunctionKind::Indicator:
      return 1.0;
  }
  return 0.0;
}

double second_moment_f(const FunctionSpec& f) {
  switch (f.kind) {
    case FunctionKind::AbsPow:
      return abs_moment(2.0 * f.p);
    case FunctionKind::HermiteSingle:
    case FunctionKind::Indicator:
      return 1.0;
    case FunctionKind::EvenPoly: {
      double acc = 0.0;
      const auto& c = f.poly_coeffs;
      for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = 0; j < c.size(); ++j) {
          acc += c[i] * c[j] * double_factorial_odd(static_cast<int>(i + j));
        }
      }
      return acc;
    }
  }
  return 0.0;
}

HermiteExpansion coefficients(const FunctionSpec& f, int M, double tol) {
  f.validate();
  if (M < 1 || M > 128) throw DomainError("expansion length M must be in [1, 128]");
  if (!(tol > 0.0)) throw DomainError("tol must be > 0");

  // Beyond the turning point sqrt(4n+2) of h_{2M} the integrand decays like
  // a Gaussian; 14 more units leave nothing measurable.
  const double x_max = std::sqrt(4.0 * (2.0 * M) + 2.0) + 14.0;
  std::vector<double> br;
  for (double x = 0.0; x < x_max; x += 1.0) br.push_back(x);
  br.push_back(x_max);

  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  HermiteExpansion out;
  out.coeffs.resize(static_cast<std::size_t>(M) + 1);
  quad::Options opt;
  opt.abs_tol = 0.5 * tol;
  for (int m = 0; m <= M; ++m) {
    auto integrand = [&](double x) {
      return f(x) * hermite_function(2 * m, x) * std::exp(-0.25 * x * x) * inv_sqrt_2pi;
    };
    const auto res = quad::integrate(integrand, std::span<const double>(br), opt);
    out.coeffs[static_cast<std::size_t>(m)] = 2.0 * res.value;
  }

  const double threshold = 10.0 * tol;
  out.k0 = 0;
  for (int m = 1; m <= M; ++m) {
    if (std::abs(out.coeffs[static_cast<std::size_t>(m)]) > threshold) {
      out.k0 = m;
      break;
    }
  }
  if (out.k0 == 0) {
    throw DomainError("k0 undefined for " + to_string(f) +
                      ": every a_2m with m >= 1 is below the zero threshold");
  }
  double sum_sq = 0.0;
  for (double a : out.coeffs) sum_sq += a * a;
  out.tail_l2 = std::max(0.0, second_moment_f(f) - sum_sq);
  return out;
}

std::vector<double> wick_coeffs(int k) {
  if (k < 1 || k > 32) throw DomainError("Wick order k must be in [1, 32]");
  std::vector<double> out;
  double binom = 1.0;  // binom(2k, 2j)
  for (int j = 0; j <= k; ++j) {
    if (j > 0) {
      binom *= static_cast<double>(2 * k - 2 * j + 2) * (2 * k - 2 * j + 1) /
               (static_cast<double>(2 * j - 1) * (2 * j));
    }
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    out.push_back(sign * binom * double_factorial_odd(j));
  }
  return out;
}

GaussHermiteRule gauss_hermite_rule(int n) {
  if (n < 1 || n > kMaxHermiteDegree) {
    throw DomainError("Gauss-Hermite size must be in [1, " + std::to_string(kMaxHermiteDegree) + "]");
  }
  // Golub-Welsch for the initial nodes, then Newton polish on h_n and
  // Christoffel weights 1 / sum_k h_k(x)^2 (computed with the e^{-x^2/4}
  // scaling to stay in range).
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  GaussHermiteRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()(i);
    for (int it = 0; it < 8; ++it) {
      const double hn = hermite_function(n, x);
      const double hn1 = hermite_function(n - 1, x);
      if (hn1 == 0.0) break;
      const double step = hn / (std::sqrt(static_cast<double>(n)) * hn1);
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    double prev = std::exp(-0.25 * x * x);
    double cur = x * prev;
    double sum = prev * prev;
    for (int k = 1; k < n; ++k) {
      sum += cur * cur;
      const double next =
          (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(static_cast<double>(k + 1));
      prev = cur;
      cur = next;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = std::exp(-0.5 * x * x) / sum;
  }
  return rule;
}

std::string to_json(const HermiteExpansion& e, int indent) {
  nlohmann::ordered_json j;
  j["coeffs"] = e.coeffs;
  j["k0"] = e.k0;
  j["tail_l2"] = e.tail_l2;
  return j.dump(indent);
}

}  // namespace gpclt
