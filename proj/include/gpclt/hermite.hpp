#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gpclt {

enum class FunctionKind {
  AbsPow,         // |x|^p, p >= 1
  HermiteSingle,  // h_{2m}
  EvenPoly,       // c0 + c2 x^2 + c4 x^4 + ...
  Indicator,      // the constant 1
};

/// A symmetric test function in L^2 of the standard Gaussian measure.
struct FunctionSpec {
  FunctionKind kind = FunctionKind::Indicator;
  double p = 1.0;                  // AbsPow exponent
  int order = 0;                   // HermiteSingle degree 2m
  std::vector<double> poly_coeffs; // EvenPoly coefficients of x^0, x^2, ...

  static FunctionSpec abs_pow(double p);
  static FunctionSpec hermite(int even_order);
  static FunctionSpec even_poly(std::vector<double> coeffs);
  static FunctionSpec one();

  void validate() const;
  double operator()(double x) const;

  bool operator==(const FunctionSpec&) const = default;
};

/// Parses `abspow:<p>`, `herm:<2m>`, `poly:<c0>,<c2>,...` and `one`.
FunctionSpec parse_function_spec(std::string_view text);
std::string to_string(const FunctionSpec& f);

inline constexpr int kMaxHermiteDegree = 512;

/// Orthonormal probabilists' Hermite polynomial h_m(x), by the three-term
/// recurrence h_{m+1} = (x h_m - sqrt(m) h_{m-1}) / sqrt(m+1).
double hermite_eval(int m, double x);

/// h_m(x) exp(-x^2/4); bounded for all m and x, so usable far into the tails.
double hermite_function(int m, double x);

struct HermiteExpansion {
  std::vector<double> coeffs;  // a_0, a_2, ..., a_{2M}
  int k0 = 0;
  double tail_l2 = 0.0;

  double a(int m) const { return coeffs.at(static_cast<std::size_t>(m)); }
  int max_index() const { return static_cast<int>(coeffs.size()) - 1; }
};

inline constexpr int kDefaultExpansionLength = 64;
inline constexpr double kDefaultCoeffTol = 1e-12;

/// a_{2m} = int f h_{2m} dmu for m = 0..M, by adaptive quadrature of
/// 2 int_0^inf (symmetry). k0 is the smallest m >= 1 with |a_{2m}| > 10 tol.
HermiteExpansion coefficients(const FunctionSpec& f, int M = kDefaultExpansionLength,
                              double tol = kDefaultCoeffTol);

/// E f(eta), closed form.
double expectation_f(const FunctionSpec& f);
/// E f(eta)^2, closed form.
double second_moment_f(const FunctionSpec& f);

/// E |eta|^p for p > -1.
double abs_moment(double p);

/// Coefficients of Z^{2k}, Z^{2k-2}, ..., Z^0 in the Wick power :Z^{2k}: of a
/// unit-variance Gaussian: (-1)^j binom(2k, 2j) (2j-1)!!.
std::vector<double> wick_coeffs(int k);

/// n-point Gauss rule for the standard Gaussian measure (weights sum to 1).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermiteRule gauss_hermite_rule(int n);

std::string to_json(const HermiteExpansion& e, int indent = 2);

}  // namespace gpclt
