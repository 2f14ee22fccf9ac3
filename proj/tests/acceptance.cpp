// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Tolerances and budgets are fixed here, not tuned.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gpclt/harness.hpp"
#include "gpclt/hermite.hpp"
#include "gpclt/kernel.hpp"
#include "gpclt/sigma_models.hpp"
#include "gpclt/variance.hpp"

using namespace gpclt;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> dyadic(int from, int to) {
  std::vector<double> hs;
  for (int e = from; e <= to; ++e) hs.push_back(std::ldexp(1.0, -e));
  return hs;
}

double ratio_spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

// 1. Brownian kernel closed form.
Outcome brownian_kernel() {
  const auto spec = IncrementVarianceSpec::power(1.0);
  double worst = 0.0;
  for (int k = 1; k <= 8; ++k) {
    for (double h : dyadic(4, 12)) {
      const double exact = 2.0 * (h / (k + 1.0) - h * h / ((k + 1.0) * (k + 2.0)));
      const double got = moment_J(spec, h, k, {0.0, 1.0}, 1e-12).value;
      worst = std::max(worst, std::abs(got - exact));
    }
  }
  return {worst <= 1e-10, "max |J - closed form| = " + fmt("%.3g", worst)};
}

// 2. Degenerate kernel sigma^2 = h^2.
Outcome degenerate_kernel() {
  const auto spec = IncrementVarianceSpec::power(2.0);
  const Interval iv{0.0, 1.5};
  const double c = iv.length();
  double worst = 0.0;
  for (int k = 1; k <= 8; ++k) {
    for (double h : {0.1, 0.01, 1.0 / 1024}) {
      worst = std::max(worst, std::abs(moment_J(spec, h, k, iv).value - c * c));
      worst = std::max(worst, std::abs(sup_moment_S(spec, h, k, iv).value - c));
    }
  }
  return {worst <= 1e-12, "max deviation from (b-a)^2, (b-a) = " + fmt("%.3g", worst)};
}

double factorial(int n) { return std::tgamma(n + 1.0); }

// 3. Hermite identities.
Outcome hermite_identities() {
  const auto rule = gauss_hermite_rule(200);
  const auto& x = rule.nodes;
  const auto& w = rule.weights;
  double orth = 0.0;
  for (int m = 0; m <= 20; ++m) {
    for (int n = 0; n <= 20; ++n) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * hermite_eval(m, x[i]) * hermite_eval(n, x[i]);
      orth = std::max(orth, std::abs(s - (m == n ? 1.0 : 0.0)));
    }
  }
  double mehler = 0.0;
  for (double alpha : {0.0, 0.3, -0.3, 0.9, -0.9}) {
    const double beta = std::sqrt(1.0 - alpha * alpha);
    for (int m = 0; m <= 5; ++m) {
      for (int n = 0; n <= 5; ++n) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double hx = hermite_eval(2 * m, x[i]);
          if (w[i] * std::abs(hx) == 0.0) continue;
          for (std::size_t j = 0; j < x.size(); ++j) {
            s += w[i] * w[j] * hx * hermite_eval(2 * n, alpha * x[i] + beta * x[j]);
          }
        }
        const double want = m == n ? std::pow(alpha, 2 * m) : 0.0;
        mehler = std::max(mehler, std::abs(s - want));
      }
    }
  }
  double wick = 0.0;
  for (int k = 1; k <= 8; ++k) {
    const auto c = wick_coeffs(k);
    for (int i = 0; i <= 1000; ++i) {
      const double xv = -5.0 + 0.01 * i;
      double lhs = 0.0, scale = 0.0;
      for (int j = 0; j <= k; ++j) {
        const double t = c[static_cast<std::size_t>(j)] * std::pow(xv, 2 * (k - j));
        lhs += t;
        scale += std::abs(t);
      }
      const double rhs = std::sqrt(factorial(2 * k)) * hermite_eval(2 * k, xv);
      wick = std::max(wick, std::abs(lhs - rhs) / scale);
    }
  }
  double genf = 0.0;
  for (double lam = -0.5; lam <= 0.5 + 1e-12; lam += 0.125) {
    for (double xv = -2.0; xv <= 2.0 + 1e-12; xv += 0.25) {
      double s = 0.0, lp = 1.0;
      for (int m = 0; m <= 60; ++m) {
        s += lp / std::sqrt(factorial(m)) * hermite_eval(m, xv);
        lp *= lam;
      }
      genf = std::max(genf, std::abs(s - std::exp(lam * xv - 0.5 * lam * lam)));
    }
  }
  const bool ok = orth <= 1e-10 && mehler <= 1e-8 && wick <= 1e-10 && genf <= 1e-8;
  return {ok, "orthonormality " + fmt("%.2g", orth) + ", Mehler " + fmt("%.2g", mehler) +
                  ", Wick (rel) " + fmt("%.2g", wick) + ", generating fn " + fmt("%.2g", genf)};
}

// 4. Coefficient oracles.
Outcome coefficient_oracles() {
  const auto e1 = coefficients(FunctionSpec::abs_pow(1.0));
  const double d0 = std::abs(e1.a(0) - std::sqrt(2.0 / std::numbers::pi));
  const double d2 = std::abs(e1.a(1) - 1.0 / std::sqrt(std::numbers::pi));
  const auto e2 = coefficients(FunctionSpec::even_poly({0.0, 1.0}));
  const double dx2 = std::abs(e2.a(1) - std::sqrt(2.0));
  double sum = 0.0;
  for (double a : e2.coeffs) sum += a * a;
  const double parseval = std::abs(sum - 3.0);
  const bool ok = d0 <= 1e-10 && d2 <= 1e-10 && dx2 <= 1e-10 && parseval <= 1e-10;
  return {ok, "|x|: a0 err " + fmt("%.2g", d0) + ", a2 err " + fmt("%.2g", d2) +
                  "; x^2: a2 err " + fmt("%.2g", dx2) + ", Parseval err " + fmt("%.2g", parseval)};
}

// 5. Power-law regimes.
Outcome power_regimes() {
  Outcome out;
  const Interval iv{0.0, 1.0};
  const std::vector<std::pair<double, int>> cases{{0.5, 2}, {1.2, 1}, {1.2, 3}, {1.5, 2}, {1.75, 4}};
  const auto hs = dyadic(15, 22);
  for (const auto& [r, k] : cases) {
    const auto spec = IncrementVarianceSpec::power(r);
    const auto aj = asymptotic_J(spec, k, iv);
    std::vector<double> ratios;
    for (double h : hs) {
      const double pred = aj.predicted(h);
      ratios.push_back(moment_J(spec, h, k, iv, 1e-8 * pred).value / pred);
    }
    const double last = ratios.back();
    bool ok;
    if (aj.regime == RegimeLabel::CriticalLog) {
      bool monotone = true;
      for (std::size_t i = 1; i < ratios.size(); ++i) {
        if (std::abs(ratios[i] - 1.0) > std::abs(ratios[i - 1] - 1.0)) monotone = false;
      }
      ok = last >= 0.85 && last <= 1.15 && monotone;
    } else {
      ok = last >= 0.95 && last <= 1.05;
    }
    out.pass = out.pass && ok;
    out.detail += "(" + fmt("%g", r) + "," + std::to_string(k) + ") " + to_string(aj.regime) + " " +
                  fmt("%.4f", last) + (ok ? "" : " [out]") + "; ";
  }
  return out;
}

// 6. Integral of |phi_1|^k.
Outcome phi1_integral() {
  double worst = 0.0;
  for (int k = 2; k <= 6; ++k) worst = std::max(worst, std::abs(eval_phi1_integral(1.0, k) - 1.0 / (k + 1.0)));
  // Brute-force trapezoid on [0, 100] with 10^7 panels, straight from the
  // definition.
  const long n = 10000000;
  const double dx = 100.0 / n;
  auto g = [](double s) {
    const double v = 0.5 * (std::sqrt(s + 1.0) + std::sqrt(std::abs(s - 1.0)) - 2.0 * std::sqrt(s));
    return v * v;
  };
  double trap = 0.5 * (g(0.0) + g(100.0));
  for (long i = 1; i < n; ++i) trap += g(i * dx);
  trap *= dx;
  const double got = eval_phi1_integral(0.5, 2);
  const double rel = std::abs(got - trap) / trap;
  return {worst <= 1e-10 && rel <= 1e-4,
          "r=1 max err " + fmt("%.2g", worst) + "; r=0.5,k=2: " + fmt("%.10g", got) + " vs trapezoid " +
              fmt("%.10g", trap) + " (rel " + fmt("%.2g", rel) + ")"};
}

// 7. Concave-family bounds.
Outcome concave_bounds() {
  Outcome out;
  const std::vector<std::pair<IncrementVarianceSpec, Interval>> cases{
      {IncrementVarianceSpec::power(0.8), {0.0, 1.0}},
      {IncrementVarianceSpec::exp_log(0.5), {0.0, 0.125}},
      {IncrementVarianceSpec::log_pow(1.0), {0.0, 0.125}}};
  int checked = 0, failed = 0;
  for (const auto& [spec, iv] : cases) {
    const double c = iv.length();
    for (int k = 1; k <= 3; ++k) {
      for (double h : dyadic(8, 16)) {
        const double J = moment_J(spec, h, k, iv, 1e-9 * c * h).value;
        const double S = sup_moment_S(spec, h, k, iv, 1e-9 * c * h).value;
        const auto b = concave_sandwich(spec, h, k, iv);
        const bool ok = b.lower <= J && J <= b.upper && J / (2.0 * c) <= S && S <= 3.0 * J / (c - h);
        ++checked;
        if (!ok) {
          ++failed;
          out.detail += to_string(spec) + " k=" + std::to_string(k) + " h=" + fmt("%g", h) + " violated; ";
        }
      }
    }
  }
  out.pass = failed == 0;
  out.detail += std::to_string(checked - failed) + "/" + std::to_string(checked) + " (spec, k, h) cells hold";
  return out;
}

// 8. Slowly varying rates.
Outcome slowly_varying_rates() {
  Outcome out;
  const Interval iv{0.0, 0.125};
  for (const auto& spec : {IncrementVarianceSpec::exp_log(0.5), IncrementVarianceSpec::log_pow(1.0)}) {
    const auto aj = asymptotic_J(spec, 2, iv);
    std::vector<double> ratios;
    for (double h : dyadic(8, 24)) {
      ratios.push_back(moment_J(spec, h, 2, iv, 1e-9 * iv.length() * h).value / aj.rate(h));
    }
    const double spread = ratio_spread(ratios);
    out.pass = out.pass && spread <= 4.0;
    out.detail += to_string(spec) + " J_2/(" + aj.rate_text() + ") spread " + fmt("%.3f", spread) + "; ";
  }
  return out;
}

struct ControlCase {
  const char* label;
  FunctionSpec f;
  IncrementVarianceSpec sigma;
  std::size_t n_paths;
  bool expect_normal;
};

std::vector<ControlCase> control_cases() {
  return {
      {"pow:1 x^2", FunctionSpec::even_poly({0.0, 1.0}), IncrementVarianceSpec::power(1.0), 4000, true},
      {"pow:0.8 |x|^1.5", FunctionSpec::abs_pow(1.5), IncrementVarianceSpec::power(0.8), 4000, true},
      {"pow:1.5 x^2", FunctionSpec::even_poly({0.0, 1.0}), IncrementVarianceSpec::power(1.5), 4000, true},
      {"pow:1.75 h_4", FunctionSpec::hermite(4), IncrementVarianceSpec::power(1.75), 4000, true},
      {"pow:2 x^2", FunctionSpec::even_poly({0.0, 1.0}), IncrementVarianceSpec::power(2.0), 2000, false},
  };
}

constexpr std::uint64_t kControlSeed = 1;

CltConfig control_config(const ControlCase& cc) {
  CltConfig cfg;
  cfg.f = cc.f;
  cfg.sigma = cc.sigma;
  cfg.a = 0.0;
  cfg.b = 1.0;
  cfg.h = 1.0 / 64;
  cfg.n_per_h = 8;
  cfg.n_paths = cc.n_paths;
  cfg.seed = kControlSeed;
  return cfg;
}

std::string serialize(const CltReport& rep) {
  std::ostringstream os;
  os << to_json(rep, std::nullopt) << '\n';
  write_z_csv(rep.z, os);
  write_histogram_csv(rep.z, os);
  return os.str();
}

std::map<std::string, std::string> g_control_outputs;

// 9. Positive controls.
Outcome positive_controls() {
  Outcome out;
  for (const auto& cc : control_cases()) {
    if (!cc.expect_normal) continue;
    const auto rep = run_clt_experiment(control_config(cc), 1);
    g_control_outputs[cc.label] = serialize(rep);
    const bool ok = rep.ks.p_value > 0.01 && std::abs(rep.moments.variance - 1.0) < 0.12 &&
                    rep.variance_check.ratio >= 0.85 && rep.variance_check.ratio <= 1.15;
    out.pass = out.pass && ok;
    out.detail += std::string(cc.label) + ": p " + fmt("%.3g", rep.ks.p_value) + ", var(Z) " +
                  fmt("%.3f", rep.moments.variance) + ", ratio " + fmt("%.3f", rep.variance_check.ratio) +
                  (ok ? "" : " [out]") + "; ";
  }
  return out;
}

// 10. Negative control.
Outcome negative_control() {
  const auto cc = control_cases().back();
  const auto rep = run_clt_experiment(control_config(cc), 1);
  g_control_outputs[cc.label] = serialize(rep);
  return {rep.ks.p_value < 1e-6, std::string(cc.label) + ": p " + fmt("%.3g", rep.ks.p_value)};
}

// 11. Condition-checker concordance for the moment-ratio condition.
Outcome condition_concordance() {
  Outcome out;
  struct Case {
    IncrementVarianceSpec spec;
    Interval iv;
    Verdict want;
  };
  const std::vector<Case> cases{
      {IncrementVarianceSpec::power(1.2), {0.0, 1.0}, Verdict::Fails},
      {IncrementVarianceSpec::power(1.5), {0.0, 1.0}, Verdict::Fails},
      {IncrementVarianceSpec::exp_log(0.5), {0.0, 0.1}, Verdict::Fails},
      {IncrementVarianceSpec::log_pow(1.0), {0.0, 0.1}, Verdict::Fails},
      {IncrementVarianceSpec::power(0.8), {0.0, 1.0}, Verdict::Holds},
  };
  std::vector<double> grid;
  for (int e = 6; e <= 60; e += 6) grid.push_back(std::ldexp(1.0, -e));
  for (const auto& c : cases) {
    const auto rep = check_conditions(c.spec, c.iv, grid, 4, 1);
    const auto got = rep.verdicts.at("moment_ratio_2_1");
    const bool ok = got == c.want;
    out.pass = out.pass && ok;
    out.detail += to_string(c.spec) + " " + to_string(got) + (ok ? "" : " [expected " + to_string(c.want) + "]") + "; ";
  }
  return out;
}

// 12. Determinism across worker counts and repeated runs.
Outcome determinism() {
  Outcome out;
  int compared = 0, mismatched = 0;
  for (const auto& cc : control_cases()) {
    const auto& ref = g_control_outputs.at(cc.label);
    for (int threads : {1, 2, 8}) {
      const auto again = serialize(run_clt_experiment(control_config(cc), threads));
      ++compared;
      if (again != ref) {
        ++mismatched;
        out.detail += std::string(cc.label) + " differs at threads=" + std::to_string(threads) + "; ";
      }
    }
  }
  out.pass = mismatched == 0;
  out.detail += std::to_string(compared - mismatched) + "/" + std::to_string(compared) + " reruns byte-identical";
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "Brownian kernel oracle", 1.0, brownian_kernel},
      {2, "degenerate kernel", 1.0, degenerate_kernel},
      {3, "Hermite identity suite", 10.0, hermite_identities},
      {4, "coefficient oracles", 5.0, coefficient_oracles},
      {5, "asymptotic regime reproduction", 60.0, power_regimes},
      {6, "phi_1 integral oracle", 30.0, phi1_integral},
      {7, "concave-family bounds", 60.0, concave_bounds},
      {8, "slowly varying rates", 60.0, slowly_varying_rates},
      {9, "CLT positive controls", 600.0, positive_controls},
      {10, "CLT negative control", 60.0, negative_control},
      {11, "condition-checker concordance", 120.0, condition_concordance},
      {12, "determinism", 1e30, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs < c.budget_s;
    const bool pass = o.pass && in_budget;
    if (!pass) ++failures;
    std::printf("%s [%2d] %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, in_budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
