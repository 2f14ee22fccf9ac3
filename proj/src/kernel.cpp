#include "gpclt/kernel.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "gpclt/errors.hpp"
#include "gpclt/quadrature.hpp"
#include "gpclt/text.hpp"

namespace gpclt {

namespace {

// Beyond this many steps the three-point second difference loses too many
// digits; switch to the Taylor expansion about s.
constexpr double kFarField = 8.0;
constexpr int kSupGrid = 256;
constexpr double kRhoSlack = 1e-12;

double ipow(double x, int k) {
  double r = 1.0;
  double base = x;
  unsigned e = static_cast<unsigned>(k);
  while (e != 0) {
    if (e & 1u) r *= base;
    base *= base;
    e >>= 1u;
  }
  return r;
}

// sum_{j>=1} binom(r, 2j) x^(2j), for |x| <= 1/kFarField.
double binomial_even_tail(double r, double x) {
  double coef = 1.0;
  double xp = 1.0;
  double sum = 0.0;
  for (int n = 1; n <= 60; ++n) {
    coef *= (r - n + 1) / n;
    xp *= x;
    if (n % 2 == 0) {
      const double term = coef * xp;
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
  }
  return sum;
}

// phi_1(u) for sigma^2(h) = h^r: (|u+1|^r + |u-1|^r - 2|u|^r) / 2.
double power_phi1(double r, double u) {
  if (u >= kFarField) return std::pow(u, r) * binomial_even_tail(r, 1.0 / u);
  const double um = std::abs(u - 1.0);
  const double pm = um == 0.0 ? 0.0 : std::pow(um, r);
  const double p0 = u == 0.0 ? 0.0 : std::pow(u, r);
  return 0.5 * (std::pow(u + 1.0, r) + pm - 2.0 * p0);
}

double general_phi(const IncrementVarianceSpec& spec, double h, double s) {
  if (s >= kFarField * h) {
    constexpr std::size_t N = 16;
    const auto series = sigma2_series<N>(spec, s);
    const double h2 = h * h;
    double hp = 1.0;
    double sum = 0.0;
    for (std::size_t j = 2; j <= N; j += 2) {
      hp *= h2;
      sum += series[j] * hp;
    }
    return sum;
  }
  return 0.5 * (detail::sigma2(spec, s + h) + detail::sigma2(spec, std::abs(s - h)) -
                2.0 * detail::sigma2(spec, s));
}

void check_phi_args(const IncrementVarianceSpec& spec, double h, double s) {
  if (!(h > 0.0)) throw DomainError("h must be > 0, got " + text::shortest(h));
  if (h > spec.h_max) {
    throw DomainError("h = " + text::shortest(h) + " exceeds hmax = " +
                      text::shortest(spec.h_max));
  }
  if (!(s >= 0.0)) throw DomainError("lag s must be >= 0, got " + text::shortest(s));
  if (!spec.extends_beyond_window() && s + h > spec.h_max) {
    throw DomainError("s + h = " + text::shortest(s + h) + " leaves the validity window (0, " +
                      text::shortest(spec.h_max) + "]");
  }
}

void check_moment_args(const IncrementVarianceSpec& spec, double h, int k, Interval iv,
                       double tol) {
  if (k < 1) throw DomainError("moment order k must be >= 1");
  if (!(iv.b > iv.a)) throw DomainError("interval requires a < b");
  if (!(tol > 0.0)) throw DomainError("tol must be > 0");
  if (!(h > 0.0) || h > spec.h_max) {
    throw DomainError("h = " + text::shortest(h) + " outside (0, hmax]");
  }
  const double c = iv.length();
  if (!(h < c)) throw DomainError("h must be smaller than b - a");
  if (!spec.extends_beyond_window() && c + h > spec.h_max) {
    throw DomainError("b - a + h = " + text::shortest(c + h) +
                      " leaves the validity window (0, " + text::shortest(spec.h_max) + "]");
  }
}

// Unchecked rho for use inside quadrature loops (arguments already vetted).
double rho_fast(const IncrementVarianceSpec& spec, double h, double s, double sigma2_h) {
  double value;
  if (spec.is_power()) {
    value = power_phi1(spec.exponent, s / h);
  } else {
    value = general_phi(spec, h, s) / sigma2_h;
  }
  if (std::abs(value) > 1.0 + kRhoSlack) {
    throw InvariantError("|rho_h(" + text::shortest(s) + ")| = " + text::shortest(value) +
                         " > 1 for " + to_string(spec) + ": not a valid increment variance");
  }
  return value;
}

}  // namespace

double phi(const IncrementVarianceSpec& spec, double h, double s) {
  check_phi_args(spec, h, s);
  if (spec.is_power()) {
    const double r = spec.exponent;
    if (s >= kFarField * h) return spec.scale * std::pow(s, r) * binomial_even_tail(r, h / s);
    const double pm = s == h ? 0.0 : std::pow(std::abs(s - h), r);
    const double p0 = s == 0.0 ? 0.0 : std::pow(s, r);
    return spec.scale * 0.5 * (std::pow(s + h, r) + pm - 2.0 * p0);
  }
  return general_phi(spec, h, s);
}

double rho(const IncrementVarianceSpec& spec, double h, double s) {
  check_phi_args(spec, h, s);
  if (s == 0.0) return 1.0;
  return rho_fast(spec, h, s, detail::sigma2(spec, h));
}

std::vector<double> kernel_breakpoints(const IncrementVarianceSpec& spec, double h, double c) {
  const double s2h = detail::sigma2(spec, h);
  std::vector<double> br{0.0};
  auto push = [&](double x) {
    if (x > br.back() && x < c) br.push_back(x);
  };
  // rho_h > 0 on [0, h/2]; a sign change can only sit in (h/2, h].
  double lo = 0.5 * h;
  double hi = h;
  const double f_lo = rho_fast(spec, h, lo, s2h);
  const double f_hi = rho_fast(spec, h, hi, s2h);
  if (f_lo > 0.0 && f_hi < 0.0) {
    for (int it = 0; it < 200 && hi - lo > 1e-14 * h; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (rho_fast(spec, h, mid, s2h) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    push(0.5 * (lo + hi));
  }
  push(h);
  for (double x = 2.0 * h; x < c; x *= 2.0) push(x);
  br.push_back(c);
  return br;
}

IntegralEstimate moment_J(const IncrementVarianceSpec& spec, double h, int k, Interval iv,
                          double tol) {
  check_moment_args(spec, h, k, iv, tol);
  const double c = iv.length();
  const double s2h = detail::sigma2(spec, h);
  const auto br = kernel_breakpoints(spec, h, c);
  auto integrand = [&](double s) {
    const double r = s == 0.0 ? 1.0 : rho_fast(spec, h, s, s2h);
    return ipow(std::abs(r), k) * (c - s);
  };
  quad::Options opt;
  opt.abs_tol = 0.5 * tol;
  const auto res = quad::integrate(integrand, std::span<const double>(br), opt);
  return {2.0 * res.value, 2.0 * res.error};
}

IntegralEstimate sup_moment_S(const IncrementVarianceSpec& spec, double h, int k, Interval iv,
                              double tol) {
  check_moment_args(spec, h, k, iv, tol);
  const double c = iv.length();
  const double s2h = detail::sigma2(spec, h);
  const auto br = kernel_breakpoints(spec, h, c);
  auto integrand = [&](double s) {
    const double r = s == 0.0 ? 1.0 : rho_fast(spec, h, s, s2h);
    return ipow(std::abs(r), k);
  };

  double err_total = 0.0;
  // Integral of |rho|^k over [x0, x1], honoring the kernel break points.
  auto piece = [&](double x0, double x1, double seg_tol) {
    std::vector<double> pts{x0};
    for (double b : br) {
      if (b > x0 && b < x1) pts.push_back(b);
    }
    pts.push_back(x1);
    quad::Options opt;
    opt.abs_tol = seg_tol;
    const auto r = quad::integrate(integrand, std::span<const double>(pts), opt);
    err_total += r.error;
    return r.value;
  };

  // F(u) = int_0^u |rho|^k on a uniform grid; the row integral at x = a + u
  // is F(u) + F(c - u).
  const double seg_tol = tol / (4.0 * kSupGrid);
  std::vector<double> grid(kSupGrid + 1), F(kSupGrid + 1, 0.0);
  for (int i = 0; i <= kSupGrid; ++i) grid[i] = c * i / kSupGrid;
  grid[kSupGrid] = c;
  for (int i = 0; i < kSupGrid; ++i) F[i + 1] = F[i] + piece(grid[i], grid[i + 1], seg_tol);

  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i <= kSupGrid; ++i) {
    const double v = F[i] + F[kSupGrid - i];
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }

  // One refinement pass around the coarse argmax.
  const int lo = std::max(0, best - 1);
  const int hi = std::min(kSupGrid, best + 1);
  const double u_lo = grid[lo];
  const double u_hi = grid[hi];
  const double F_lo = F[lo];
  const double F_mirror_hi = F[kSupGrid - lo];  // F(c - u_lo)
  double Fu = F_lo;
  double Fm = F_mirror_hi;
  double prev = u_lo;
  for (int j = 1; j < kSupGrid; ++j) {
    const double u = u_lo + (u_hi - u_lo) * j / kSupGrid;
    Fu += piece(prev, u, seg_tol);
    Fm -= piece(c - u, c - prev, seg_tol);
    prev = u;
    best_val = std::max(best_val, Fu + Fm);
  }
  return {best_val, 2.0 * err_total};
}

const KernelMomentEntry& KernelMomentTable::at(int k, double h) const {
  for (const auto& e : entries) {
    if (e.k == k && e.h == h) return e;
  }
  throw DomainError("no table entry for k = " + std::to_string(k) + ", h = " +
                    text::shortest(h));
}

namespace {

KernelMomentEntry compute_cell(const IncrementVarianceSpec& spec, Interval iv, int k, double h,
                               double tol, bool with_sup) {
  KernelMomentEntry e;
  e.k = k;
  e.h = h;
  const auto J = moment_J(spec, h, k, iv, tol);
  e.J = J.value;
  e.J_err = J.error;
  if (with_sup) {
    const auto S = sup_moment_S(spec, h, k, iv, tol);
    e.S = S.value;
    e.S_err = S.error;
  }
  return e;
}

}  // namespace

KernelMomentTable moment_table_serial(const IncrementVarianceSpec& spec, Interval iv,
                                      std::span<const int> ks, std::span<const double> hs,
                                      double tol, bool with_sup) {
  KernelMomentTable table{iv, {}};
  table.entries.reserve(ks.size() * hs.size());
  for (double h : hs) {
    for (int k : ks) table.entries.push_back(compute_cell(spec, iv, k, h, tol, with_sup));
  }
  return table;
}

KernelMomentTable moment_table(const IncrementVarianceSpec& spec, Interval iv,
                               std::span<const int> ks, std::span<const double> hs, double tol,
                               bool with_sup, int threads) {
  const std::ptrdiff_t nk = static_cast<std::ptrdiff_t>(ks.size());
  const std::ptrdiff_t ncell = nk * static_cast<std::ptrdiff_t>(hs.size());
  KernelMomentTable table{iv, std::vector<KernelMomentEntry>(static_cast<std::size_t>(ncell))};
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(ncell));
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
  for (std::ptrdiff_t cell = 0; cell < ncell; ++cell) {
    const auto idx = static_cast<std::size_t>(cell);
    try {
      table.entries[idx] = compute_cell(spec, iv, ks[static_cast<std::size_t>(cell % nk)],
                                        hs[static_cast<std::size_t>(cell / nk)], tol, with_sup);
    } catch (...) {
      failures[idx] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return table;
}

void write_csv(const KernelMomentTable& table, std::ostream& out) {
  out << "k,h,J,S,J_err,S_err\n";
  for (const auto& e : table.entries) {
    out << e.k << ',' << text::digits17(e.h) << ',' << text::digits17(e.J) << ','
        << text::digits17(e.S) << ',' << text::digits17(e.J_err) << ','
        << text::digits17(e.S_err) << '\n';
  }
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds:
      return "consistent-with-holds";
    case Verdict::Fails:
      return "consistent-with-fails";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

bool trend_vanishes(std::span<const double> seq) {
  if (seq.size() < 2) return false;
  const std::size_t start = (seq.size() - 1) / 2;
  for (std::size_t i = start + 1; i < seq.size(); ++i) {
    if (seq[i] > 1.05 * seq[i - 1]) return false;
  }
  return seq.back() < 0.5 * seq.front();
}

Verdict small_o_verdict(std::span<const double> seq) {
  if (seq.size() < 2) return Verdict::Inconclusive;
  if (trend_vanishes(seq)) return Verdict::Holds;
  if (seq.back() > 0.01 && seq.back() >= 0.5 * seq.front()) return Verdict::Fails;
  return Verdict::Inconclusive;
}

Verdict liminf_positive_verdict(std::span<const double> seq) {
  if (seq.size() < 2) return Verdict::Inconclusive;
  if (trend_vanishes(seq)) return Verdict::Fails;
  if (seq.back() > 0.01 && seq.back() >= 0.5 * seq.front()) return Verdict::Holds;
  return Verdict::Inconclusive;
}

ConditionReport check_conditions(const IncrementVarianceSpec& spec, Interval iv,
                                 std::span<const double> h_grid, int j_max, int k0, double tol,
                                 int threads) {
  if (k0 < 1) throw DomainError("k0 must be >= 1");
  if (j_max < 2 * k0 + 2) throw DomainError("j_max must be >= 2 k0 + 2");
  if (h_grid.size() < 2) throw DomainError("h grid needs at least two points");
  for (std::size_t i = 1; i < h_grid.size(); ++i) {
    if (!(h_grid[i] < h_grid[i - 1])) throw DomainError("h grid must be strictly decreasing");
  }

  std::vector<int> ks(static_cast<std::size_t>(j_max));
  for (int k = 1; k <= j_max; ++k) ks[static_cast<std::size_t>(k - 1)] = k;
  const auto table = moment_table(spec, iv, ks, h_grid, tol, true, threads);
  const auto nk = ks.size();
  auto cell = [&](std::size_t hi, int k) -> const KernelMomentEntry& {
    return table.entries[hi * nk + static_cast<std::size_t>(k - 1)];
  };

  ConditionReport rep;
  rep.h_grid.assign(h_grid.begin(), h_grid.end());
  rep.k0 = k0;
  const std::size_t nh = h_grid.size();

  std::vector<std::vector<double>> sup_ratio(nk);
  rep.bounded_ratio.assign(nk, 0.0);
  for (int k = 1; k <= j_max; ++k) {
    for (std::size_t i = 0; i < nh; ++i) {
      const double ratio = cell(i, k).S / cell(i, k).J;
      sup_ratio[static_cast<std::size_t>(k - 1)].push_back(ratio);
      rep.bounded_ratio[static_cast<std::size_t>(k - 1)] =
          std::max(rep.bounded_ratio[static_cast<std::size_t>(k - 1)], ratio);
    }
  }
  rep.smallo_trend.resize(static_cast<std::size_t>(j_max - 1));
  for (int j = 1; j < j_max; ++j) {
    auto& row = rep.smallo_trend[static_cast<std::size_t>(j - 1)];
    for (std::size_t i = 0; i < nh; ++i) {
      row.push_back(std::pow(cell(i, j).J, 1.0 / j) /
                    std::pow(cell(i, j + 1).J, 1.0 / (j + 1)));
    }
  }
  for (std::size_t i = 0; i < nh; ++i) {
    rep.st_sup_trend.push_back(cell(i, 1).S);
    rep.st_ratio_trend.push_back(cell(i, 2).J / cell(i, 1).J);
    rep.ccl_ratio_trend.push_back(cell(i, 2 * k0 + 2).J / cell(i, 2 * k0).J);
  }

  // Bounded: no k may show a ratio growing without bound (its reciprocal
  // vanishing); "holds" needs every ratio to stay within twice its start.
  Verdict bounded = Verdict::Holds;
  for (const auto& seq : sup_ratio) {
    std::vector<double> inv;
    for (double v : seq) inv.push_back(1.0 / v);
    if (trend_vanishes(inv)) {
      bounded = Verdict::Fails;
      break;
    }
    if (seq.back() > 2.0 * seq.front()) bounded = Verdict::Inconclusive;
  }
  rep.verdicts["bounded_sup_ratio"] = bounded;
  for (int j = 1; j < j_max; ++j) {
    rep.verdicts["smallo_j" + std::to_string(j)] =
        small_o_verdict(rep.smallo_trend[static_cast<std::size_t>(j - 1)]);
  }
  rep.verdicts["sup_integral_vanishes"] = small_o_verdict(rep.st_sup_trend);
  rep.verdicts["moment_ratio_2_1"] = liminf_positive_verdict(rep.st_ratio_trend);
  rep.verdicts["moment_ratio_ccl"] = liminf_positive_verdict(rep.ccl_ratio_trend);
  return rep;
}

std::string to_json(const ConditionReport& report, int indent) {
  nlohmann::ordered_json j;
  j["h_grid"] = report.h_grid;
  j["k0"] = report.k0;
  j["bounded_ratio"] = report.bounded_ratio;
  j["smallo_trend"] = report.smallo_trend;
  j["st_sup_trend"] = report.st_sup_trend;
  j["st_ratio_trend"] = report.st_ratio_trend;
  j["ccl_ratio_trend"] = report.ccl_ratio_trend;
  nlohmann::ordered_json v = nlohmann::ordered_json::object();
  for (const auto& [name, verdict] : report.verdicts) v[name] = to_string(verdict);
  j["verdicts"] = v;
  return j.dump(indent);
}

}  // namespace gpclt
