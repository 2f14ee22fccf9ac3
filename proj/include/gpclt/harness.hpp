#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpclt/hermite.hpp"
#include "gpclt/kernel.hpp"
#include "gpclt/sigma_models.hpp"
#include "gpclt/simulate.hpp"
#include "gpclt/stats.hpp"
#include "gpclt/variance.hpp"

namespace gpclt {

struct CltConfig {
  FunctionSpec f = FunctionSpec::even_poly({0.0, 1.0});
  IncrementVarianceSpec sigma = IncrementVarianceSpec::power(1.0);
  double a = 0.0;
  double b = 1.0;
  double h = 1.0 / 64;
  int n_per_h = 8;
  std::size_t n_paths = 4000;
  std::uint64_t seed = 1;
  double tol = kDefaultVarianceTol;
  int expansion_length = kDefaultExpansionLength;
};

struct VarianceCheck {
  double empirical = 0.0;  // sample variance of I
  double formula = 0.0;    // truncated-series Var
  double ratio = 0.0;
  double kurtosis_I = 0.0;  // sample kurtosis of I (normal: 3)
};

struct CltReport {
  CltConfig config;
  SamplingMethod method = SamplingMethod::CirculantEmbedding;
  double a0 = 0.0;
  int k0 = 0;
  std::vector<double> I;
  std::vector<double> z;
  Moments moments;
  KsResult ks;
  VarianceCheck variance_check;
};

/// Samples n_paths realizations of I(f, h), standardizes each by the exact
/// mean (b - a) E f(eta) and the truncated-series variance, and tests the
/// result against N(0, 1).
CltReport run_clt_experiment(const CltConfig& config, int threads = 0);

/// `verdict` is attached when the caller asserted an expectation.
std::string to_json(const CltReport& report, const std::optional<std::string>& verdict,
                    int indent = 2);

inline constexpr int kHistogramBins = 64;
inline constexpr double kHistogramRange = 5.0;

/// 64 equal bins on [-5, 5] with the bin-averaged standard normal density.
void write_histogram_csv(std::span<const double> z, std::ostream& out);
void write_z_csv(std::span<const double> z, std::ostream& out);

struct StudyRow {
  double h = 0.0;
  double J[4] = {0.0, 0.0, 0.0, 0.0};  // J_2, J_4, J_6, J_8
  double exact = 0.0;
  double asymptotic = 0.0;
  double ratio = 0.0;  // exact / asymptotic
};

/// One row per h: kernel moments, exact series variance and the leading
/// asymptotic predictor. Rows are computed concurrently and returned in grid
/// order.
std::vector<StudyRow> variance_convergence_study(const FunctionSpec& f,
                                                 const IncrementVarianceSpec& spec, Interval iv,
                                                 std::span<const double> h_grid,
                                                 int expansion_length = kDefaultExpansionLength,
                                                 double tol = kDefaultVarianceTol,
                                                 int threads = 0);

void write_csv(std::span<const StudyRow> rows, std::ostream& out);

}  // namespace gpclt
