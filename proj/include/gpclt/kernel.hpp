#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gpclt/sigma_models.hpp"

namespace gpclt {

struct Interval {
  double a = 0.0;
  double b = 1.0;
  double length() const { return b - a; }
};

struct IntegralEstimate {
  double value = 0.0;
  double error = 0.0;
};

inline constexpr double kDefaultKernelTol = 1e-10;

/// phi_h(s) = (sigma^2(s+h) + sigma^2(|s-h|) - 2 sigma^2(s)) / 2, the
/// covariance of increments over step h at lag s.
double phi(const IncrementVarianceSpec& spec, double h, double s);

/// rho_h(s) = phi_h(s) / sigma^2(h); |rho_h| <= 1 is enforced.
double rho(const IncrementVarianceSpec& spec, double h, double s);

/// J_k(h) = int_a^b int_a^b |rho_h(x-y)|^k dx dy, computed as the 1-D
/// reduction 2 int_0^c |rho_h(s)|^k (c-s) ds.
IntegralEstimate moment_J(const IncrementVarianceSpec& spec, double h, int k,
                          Interval iv, double tol = kDefaultKernelTol);

/// S_k(h) = sup_{a<=x<=b} int_a^b |rho_h(x-y)|^k dy.
IntegralEstimate sup_moment_S(const IncrementVarianceSpec& spec, double h, int k,
                              Interval iv, double tol = kDefaultKernelTol);

/// Break points for integrating |rho_h|^k over [0, c]: 0, h, 2h, the sign
/// change of rho_h in (h/2, h] if any, then a dyadic ladder 4h, 8h, ...
std::vector<double> kernel_breakpoints(const IncrementVarianceSpec& spec, double h,
                                       double c);

struct KernelMomentEntry {
  int k = 1;
  double h = 0.0;
  double J = 0.0;
  double S = 0.0;
  double J_err = 0.0;
  double S_err = 0.0;
};

struct KernelMomentTable {
  Interval interval;
  std::vector<KernelMomentEntry> entries;

  const KernelMomentEntry& at(int k, double h) const;
};

/// Fills one entry per (k, h) pair, h-major. Cells are evaluated concurrently
/// with OpenMP; each cell is independent, so the result is bit-identical to
/// moment_table_serial.
KernelMomentTable moment_table(const IncrementVarianceSpec& spec, Interval iv,
                               std::span<const int> ks, std::span<const double> hs,
                               double tol = kDefaultKernelTol, bool with_sup = true,
                               int threads = 0);
KernelMomentTable moment_table_serial(const IncrementVarianceSpec& spec, Interval iv,
                                      std::span<const int> ks,
                                      std::span<const double> hs,
                                      double tol = kDefaultKernelTol,
                                      bool with_sup = true);

void write_csv(const KernelMomentTable& table, std::ostream& out);

enum class Verdict { Holds, Fails, Inconclusive };
std::string to_string(Verdict v);

struct ConditionReport {
  std::vector<double> h_grid;
  // Indexed by k - 1: sup over the grid of S_k / J_k.
  std::vector<double> bounded_ratio;
  // Indexed by j - 1: per h, J_j^(1/j) / J_{j+1}^(1/(j+1)).
  std::vector<std::vector<double>> smallo_trend;
  std::vector<double> st_sup_trend;
  std::vector<double> st_ratio_trend;
  std::vector<double> ccl_ratio_trend;
  int k0 = 1;
  // Keyed by condition name, see check_conditions.
  std::map<std::string, Verdict> verdicts;
};

/// Diagnoses the kernel hypotheses of the CLT along a decreasing h grid.
///
/// Verdict keys: "bounded_sup_ratio" (sup-integral bounded by the double
/// integral), "smallo_j<j>" for each j (moment roots strictly ordered),
/// "sup_integral_vanishes" (sup of the k=1 row integral tends to zero),
/// "moment_ratio_2_1" (liminf J_2/J_1 > 0), "moment_ratio_ccl" (liminf
/// J_{2k0+2}/J_{2k0} > 0).
ConditionReport check_conditions(const IncrementVarianceSpec& spec, Interval iv,
                                 std::span<const double> h_grid, int j_max, int k0,
                                 double tol = kDefaultKernelTol, int threads = 0);

/// A diagnostic "vanishes" when it decreases (allowing 5% upticks) over the
/// last half of the grid and its final value is below half its first value.
bool trend_vanishes(std::span<const double> seq);
/// Verdict for a condition asserting the diagnostic tends to zero.
Verdict small_o_verdict(std::span<const double> seq);
/// Verdict for a condition asserting liminf of the diagnostic is positive.
Verdict liminf_positive_verdict(std::span<const double> seq);

std::string to_json(const ConditionReport& report, int indent = 2);

}  // namespace gpclt
