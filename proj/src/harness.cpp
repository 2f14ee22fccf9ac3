#include "gpclt/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>

#include <json.hpp>

#include "gpclt/errors.hpp"
#include "gpclt/text.hpp"

namespace gpclt {

CltReport run_clt_experiment(const CltConfig& config, int threads) {
  if (config.n_paths < 100) {
    throw DomainError("n_paths must be >= 100, got " + std::to_string(config.n_paths));
  }
  config.sigma.validate();
  const Interval iv{config.a, config.b};
  GridSpec grid{config.a, config.b, config.h, config.n_per_h};
  grid.validate();

  CltReport rep;
  rep.config = config;
  const auto fexp = coefficients(config.f, config.expansion_length);
  rep.k0 = fexp.k0;
  rep.a0 = expectation_f(config.f);
  const auto var = exact_variance(fexp, config.sigma, iv, config.h, config.tol, 0.0, false);

  const auto bundle = sample_paths(config.sigma, grid, config.n_paths, config.seed, threads);
  rep.method = bundle.method;
  rep.I = functional_I(bundle, config.f, config.sigma, grid, config.h);

  const double center = iv.length() * rep.a0;
  const double scale = 1.0 / std::sqrt(var.exact);
  rep.z.resize(rep.I.size());
  for (std::size_t i = 0; i < rep.I.size(); ++i) rep.z[i] = (rep.I[i] - center) * scale;

  rep.moments = moments(rep.z);
  rep.ks = ks_test(rep.z);
  const auto mi = moments(rep.I);
  rep.variance_check.empirical = mi.variance;
  rep.variance_check.formula = var.exact;
  rep.variance_check.ratio = mi.variance / var.exact;
  rep.variance_check.kurtosis_I = mi.excess_kurtosis + 3.0;
  return rep;
}

std::string to_json(const CltReport& report, const std::optional<std::string>& verdict,
                    int indent) {
  const auto& c = report.config;
  nlohmann::ordered_json j;
  j["config"] = {{"f", to_string(c.f)},
                 {"sigma", to_string(c.sigma)},
                 {"a", c.a},
                 {"b", c.b},
                 {"h", c.h},
                 {"n_per_h", c.n_per_h},
                 {"n_paths", c.n_paths},
                 {"seed", c.seed},
                 {"tol", c.tol},
                 {"expansion_length", c.expansion_length}};
  j["method"] = to_string(report.method);
  j["a0"] = report.a0;
  j["k0"] = report.k0;
  const auto& m = report.moments;
  j["moments"] = {{"mean", m.mean},
                  {"mean_se", m.mean_se},
                  {"variance", m.variance},
                  {"variance_se", m.variance_se},
                  {"skewness", m.skewness},
                  {"skewness_se", m.skewness_se},
                  {"excess_kurtosis", m.excess_kurtosis},
                  {"excess_kurtosis_se", m.excess_kurtosis_se}};
  j["ks"] = {{"D", report.ks.D}, {"p_value", report.ks.p_value}};
  const auto& v = report.variance_check;
  j["variance_check"] = {{"empirical", v.empirical},
                         {"formula", v.formula},
                         {"ratio", v.ratio},
                         {"kurtosis_I", v.kurtosis_I}};
  if (verdict) j["verdict"] = *verdict;
  return j.dump(indent);
}

void write_histogram_csv(std::span<const double> z, std::ostream& out) {
  std::vector<long long> counts(kHistogramBins, 0);
  const double width = 2.0 * kHistogramRange / kHistogramBins;
  for (double v : z) {
    if (!(v >= -kHistogramRange && v <= kHistogramRange)) continue;
    auto bin = static_cast<int>(std::floor((v + kHistogramRange) / width));
    bin = std::clamp(bin, 0, kHistogramBins - 1);
    ++counts[static_cast<std::size_t>(bin)];
  }
  out << "bin_left,bin_right,count,normal_density\n";
  for (int i = 0; i < kHistogramBins; ++i) {
    const double left = -kHistogramRange + i * width;
    const double right = i + 1 == kHistogramBins ? kHistogramRange : left + width;
    const double density = (normal_cdf(right) - normal_cdf(left)) / (right - left);
    out << text::digits17(left) << ',' << text::digits17(right) << ','
        << counts[static_cast<std::size_t>(i)] << ',' << text::digits17(density) << '\n';
  }
}

void write_z_csv(std::span<const double> z, std::ostream& out) {
  out << "path_id,z\n";
  for (std::size_t i = 0; i < z.size(); ++i) out << i << ',' << text::digits17(z[i]) << '\n';
}

std::vector<StudyRow> variance_convergence_study(const FunctionSpec& f,
                                                 const IncrementVarianceSpec& spec, Interval iv,
                                                 std::span<const double> h_grid,
                                                 int expansion_length, double tol, int threads) {
  const auto fexp = coefficients(f, expansion_length);
  const auto av = asymptotic_variance(fexp, spec, iv);
  std::vector<StudyRow> rows(h_grid.size());
  std::vector<std::exception_ptr> errors(h_grid.size());
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(h_grid.size()); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const double h = h_grid[idx];
      const double ktol = 1e-9 * iv.length() * h;
      StudyRow row;
      row.h = h;
      for (int m = 1; m <= 4; ++m) row.J[m - 1] = moment_J(spec, h, 2 * m, iv, ktol).value;
      row.exact = exact_variance(fexp, spec, iv, h, tol, ktol, false).exact;
      row.asymptotic = av.eval(h);
      row.ratio = row.exact / row.asymptotic;
      rows[idx] = row;
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void write_csv(std::span<const StudyRow> rows, std::ostream& out) {
  out << "h,J2,J4,J6,J8,exact,asymptotic,ratio\n";
  for (const auto& r : rows) {
    out << text::digits17(r.h);
    for (double j : r.J) out << ',' << text::digits17(j);
    out << ',' << text::digits17(r.exact) << ',' << text::digits17(r.asymptotic) << ','
        << text::digits17(r.ratio) << '\n';
  }
}

}  // namespace gpclt
