#include "gpclt/simulate.hpp"

#include <fftw3.h>
#include <omp.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>

#include "gpclt/errors.hpp"
#include "gpclt/kernel.hpp"
#include "gpclt/rng.hpp"
#include "gpclt/text.hpp"

namespace gpclt {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

FftwBuffer fftw_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer(p);
}

class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    auto in = fftw_buffer(n);
    auto out = fftw_buffer(n);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), FFTW_FORWARD,
                             FFTW_ESTIMATE);
    if (plan_ == nullptr) throw std::runtime_error("FFTW planning failed");
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }

  // Buffers must come from fftw_buffer so their alignment matches the plan.
  void run(fftw_complex* in, fftw_complex* out) const { fftw_execute_dft(plan_, in, out); }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  fftw_plan plan_ = nullptr;
};

std::size_t embedding_size(std::size_t n_steps) {
  std::size_t m = 1;
  while (m < 2 * n_steps) m <<= 1;
  return m;
}

// First row of the circulant embedding. Lags beyond the validity window of
// the non-power families are padded with zeros; the leading n_steps block
// is still the exact Toeplitz matrix.
std::vector<double> embedding_row(const IncrementVarianceSpec& spec, double delta,
                                  std::size_t n_steps, std::size_t m) {
  const std::size_t half = m / 2;
  const std::size_t known = spec.extends_beyond_window() ? half : n_steps - 1;
  const auto gamma = increment_autocov(spec, delta, known);
  std::vector<double> row(m, 0.0);
  for (std::size_t j = 0; j <= half; ++j) {
    const double g = j <= known ? gamma[j] : 0.0;
    row[j] = g;
    if (j != 0 && j != half) row[m - j] = g;
  }
  return row;
}

std::vector<double> spectrum_of(const std::vector<double>& row) {
  const std::size_t m = row.size();
  FftPlan plan(m);
  auto in = fftw_buffer(m);
  auto out = fftw_buffer(m);
  for (std::size_t j = 0; j < m; ++j) {
    in[j][0] = row[j];
    in[j][1] = 0.0;
  }
  plan.run(in.get(), out.get());
  std::vector<double> lam(m);
  for (std::size_t j = 0; j < m; ++j) lam[j] = out[j][0];
  return lam;
}

// Sampler state shared read-only by all workers.
struct Sampler {
  SamplingMethod method = SamplingMethod::CirculantEmbedding;
  std::size_t n_steps = 0;
  double min_ratio = 0.0;
  // Circulant: sqrt(lambda_k / m).
  std::vector<double> amp;
  std::unique_ptr<FftPlan> plan;
  // Levinson: row t holds phi_{t,1..t}; sd[t] = sqrt(v_t).
  std::vector<double> coeffs;
  std::vector<double> sd;
  // Dense: lower Cholesky factor.
  Eigen::MatrixXd chol;
};

bool try_levinson(const std::vector<double>& gamma, Sampler& s) {
  const std::size_t n = gamma.size();
  s.coeffs.assign(n * (n - 1) / 2, 0.0);
  s.sd.assign(n, 0.0);
  double v = gamma[0];
  if (!(v > 0.0)) return false;
  s.sd[0] = std::sqrt(v);
  std::vector<double> prev, cur;
  for (std::size_t t = 1; t < n; ++t) {
    double acc = gamma[t];
    for (std::size_t j = 1; j < t; ++j) acc -= prev[j - 1] * gamma[t - j];
    const double ptt = acc / v;
    cur.assign(t, 0.0);
    for (std::size_t j = 1; j < t; ++j) cur[j - 1] = prev[j - 1] - ptt * prev[t - j - 1];
    cur[t - 1] = ptt;
    v *= (1.0 - ptt * ptt);
    if (!(v > 1e-14 * gamma[0]) || !std::isfinite(v)) return false;
    s.sd[t] = std::sqrt(v);
    std::copy(cur.begin(), cur.end(), s.coeffs.begin() + static_cast<std::ptrdiff_t>(t * (t - 1) / 2));
    prev.swap(cur);
  }
  return true;
}

Sampler make_sampler(const IncrementVarianceSpec& spec, double delta, std::size_t n_steps) {
  Sampler s;
  s.n_steps = n_steps;
  const std::size_t m = embedding_size(n_steps);
  const auto lam = spectrum_of(embedding_row(spec, delta, n_steps, m));
  const double lmax = *std::max_element(lam.begin(), lam.end());
  const double lmin = *std::min_element(lam.begin(), lam.end());
  s.min_ratio = lmax > 0.0 ? lmin / lmax : -1.0;
  if (lmax > 0.0 && lmin >= -kClipThreshold * lmax) {
    s.method = SamplingMethod::CirculantEmbedding;
    s.amp.resize(m);
    // Eigenvalues at the FFT round-off floor are zero in exact arithmetic;
    // their square roots would otherwise inject noise of relative size
    // sqrt(eps) into rank-deficient covariances.
    const double floor = static_cast<double>(m) * std::numeric_limits<double>::epsilon() * lmax;
    for (std::size_t k = 0; k < m; ++k) {
      const double l = lam[k] > floor ? lam[k] : 0.0;
      s.amp[k] = std::sqrt(l / static_cast<double>(m));
    }
    s.plan = std::make_unique<FftPlan>(m);
    return s;
  }

  const auto gamma = increment_autocov(spec, delta, n_steps - 1);
  if (try_levinson(gamma, s)) {
    s.method = SamplingMethod::Levinson;
    return s;
  }
  s.coeffs.clear();
  s.sd.clear();

  const auto n = static_cast<Eigen::Index>(n_steps);
  Eigen::MatrixXd T(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) T(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
    T(i, i) += kJitter * gamma[0];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(T);
  if (llt.info() != Eigen::Success) {
    throw CovarianceInvalidError("increment covariance of " + to_string(spec) + " at delta = " +
                                 text::shortest(delta) + " is not positive semidefinite");
  }
  s.method = SamplingMethod::DenseFactorization;
  s.chol = llt.matrixL();
  return s;
}

struct Workspace {
  FftwBuffer in, out;
  std::vector<double> z;
};

Workspace make_workspace(const Sampler& s) {
  Workspace w;
  if (s.method == SamplingMethod::CirculantEmbedding) {
    w.in = fftw_buffer(s.amp.size());
    w.out = fftw_buffer(s.amp.size());
  } else {
    w.z.resize(s.n_steps);
  }
  return w;
}

void draw_path(const Sampler& s, Workspace& w, std::uint64_t seed, std::uint64_t path,
               double* dst) {
  PhiloxStream rng(seed, path);
  const std::size_t n = s.n_steps;
  switch (s.method) {
    case SamplingMethod::CirculantEmbedding: {
      const std::size_t m = s.amp.size();
      for (std::size_t k = 0; k < m; ++k) {
        const double re = rng.normal();
        const double im = rng.normal();
        w.in[k][0] = s.amp[k] * re;
        w.in[k][1] = s.amp[k] * im;
      }
      s.plan->run(w.in.get(), w.out.get());
      for (std::size_t j = 0; j < n; ++j) dst[j] = w.out[j][0];
      break;
    }
    case SamplingMethod::Levinson: {
      for (std::size_t t = 0; t < n; ++t) {
        const double* phi_t = s.coeffs.data() + t * (t - 1) / 2;
        double mean = 0.0;
        for (std::size_t j = 1; j <= t; ++j) mean += phi_t[j - 1] * dst[t - j];
        dst[t] = mean + s.sd[t] * rng.normal();
      }
      break;
    }
    case SamplingMethod::DenseFactorization: {
      for (std::size_t j = 0; j < n; ++j) w.z[j] = rng.normal();
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j) {
          acc += s.chol(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * w.z[j];
        }
        dst[i] = acc;
      }
      break;
    }
  }
}

PathBundle empty_bundle(const Sampler& s, double delta, std::size_t n_paths, std::uint64_t seed,
                        std::uint64_t first_path) {
  PathBundle b;
  b.n_paths = n_paths;
  b.n_steps = s.n_steps;
  b.delta = delta;
  b.seed = seed;
  b.first_path = first_path;
  b.method = s.method;
  b.min_eigen_ratio = s.min_ratio;
  b.increments.assign(n_paths * s.n_steps, 0.0);
  return b;
}

void check_sampling_args(double delta, std::size_t n_steps, std::size_t n_paths) {
  if (!(delta > 0.0)) throw DomainError("grid step must be > 0");
  if (n_steps < 1) throw DomainError("n_steps must be >= 1");
  if (n_paths < 1) throw DomainError("n_paths must be >= 1");
}

}  // namespace

std::size_t GridSpec::n_eval() const {
  const double x = (b - a) / delta();
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

void GridSpec::validate() const {
  if (!(b > a)) throw DomainError("grid requires a < b");
  if (!(h > 0.0)) throw DomainError("h must be > 0");
  if (n_per_h < 1) throw DomainError("n_per_h must be >= 1");
  if ((b - a) / delta() < 16.0 * (1.0 - 1e-12)) {
    throw DomainError("grid too coarse: (b - a) / delta = " + text::shortest((b - a) / delta()) +
                      " < 16");
  }
}

std::string to_string(SamplingMethod m) {
  switch (m) {
    case SamplingMethod::CirculantEmbedding:
      return "CirculantEmbedding";
    case SamplingMethod::Levinson:
      return "Levinson";
    case SamplingMethod::DenseFactorization:
      return "DenseFactorization";
  }
  return "unknown";
}

std::vector<double> increment_autocov(const IncrementVarianceSpec& spec, double delta,
                                      std::size_t max_lag) {
  spec.validate();
  if (!(delta > 0.0)) throw DomainError("delta must be > 0");
  if (!spec.extends_beyond_window() && delta * (static_cast<double>(max_lag) + 1.0) > spec.h_max) {
    throw DomainError("lags up to " + std::to_string(max_lag) + " at delta = " +
                      text::shortest(delta) + " leave the validity window (0, " +
                      text::shortest(spec.h_max) + "]");
  }
  std::vector<double> g(max_lag + 1);
  g[0] = eval_sigma2(spec, delta);
  for (std::size_t j = 1; j <= max_lag; ++j) g[j] = phi(spec, delta, static_cast<double>(j) * delta);
  return g;
}

std::vector<double> embedding_spectrum(const IncrementVarianceSpec& spec, double delta,
                                       std::size_t n_steps) {
  check_sampling_args(delta, n_steps, 1);
  return spectrum_of(embedding_row(spec, delta, n_steps, embedding_size(n_steps)));
}

PathBundle sample_increments(const IncrementVarianceSpec& spec, double delta,
                             std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
                             std::uint64_t first_path, int threads) {
  check_sampling_args(delta, n_steps, n_paths);
  const Sampler s = make_sampler(spec, delta, n_steps);
  PathBundle b = empty_bundle(s, delta, n_paths, seed, first_path);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  std::exception_ptr failure;
#pragma omp parallel num_threads(nt)
  {
    try {
      Workspace w = make_workspace(s);
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_paths); ++i) {
        draw_path(s, w, seed, first_path + static_cast<std::uint64_t>(i),
                  b.increments.data() + static_cast<std::size_t>(i) * n_steps);
      }
    } catch (...) {
#pragma omp critical(gpclt_sample_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return b;
}

PathBundle sample_increments_serial(const IncrementVarianceSpec& spec, double delta,
                                    std::size_t n_steps, std::size_t n_paths,
                                    std::uint64_t seed, std::uint64_t first_path) {
  check_sampling_args(delta, n_steps, n_paths);
  const Sampler s = make_sampler(spec, delta, n_steps);
  PathBundle b = empty_bundle(s, delta, n_paths, seed, first_path);
  Workspace w = make_workspace(s);
  for (std::size_t i = 0; i < n_paths; ++i) {
    draw_path(s, w, seed, first_path + i, b.increments.data() + i * n_steps);
  }
  return b;
}

PathBundle sample_paths(const IncrementVarianceSpec& spec, const GridSpec& grid,
                        std::size_t n_paths, std::uint64_t seed, int threads) {
  grid.validate();
  return sample_increments(spec, grid.delta(), grid.n_steps(), n_paths, seed, 0, threads);
}

PathBundle sample_paths_serial(const IncrementVarianceSpec& spec, const GridSpec& grid,
                               std::size_t n_paths, std::uint64_t seed) {
  grid.validate();
  return sample_increments_serial(spec, grid.delta(), grid.n_steps(), n_paths, seed);
}

std::vector<double> functional_I(const PathBundle& bundle, const FunctionSpec& f,
                                 const IncrementVarianceSpec& spec, const GridSpec& grid,
                                 double h) {
  grid.validate();
  f.validate();
  const double delta = grid.delta();
  const double qd = h / delta;
  const double qr = std::round(qd);
  if (!(qr >= 1.0) || std::abs(qd - qr) > 1e-9 * qr) {
    throw AlignmentError("h = " + text::shortest(h) + " is not an integer multiple of delta = " +
                         text::shortest(delta));
  }
  const auto q = static_cast<std::size_t>(qr);
  const std::size_t n_eval = grid.n_eval();
  if (bundle.n_steps < n_eval + q) {
    throw DomainError("paths have " + std::to_string(bundle.n_steps) + " steps; " +
                      std::to_string(n_eval + q) + " are needed to cover [a, b + h]");
  }
  const double inv_sigma = 1.0 / std::sqrt(eval_sigma2(spec, h));
  std::vector<double> out(bundle.n_paths);
  for (std::size_t p = 0; p < bundle.n_paths; ++p) {
    const auto inc = bundle.row(p);
    // Sliding window sum of q increments, recomputed directly every 64
    // positions so rounding does not accumulate along the path.
    double window = 0.0;
    for (std::size_t j = 0; j < q; ++j) window += inc[j];
    double acc = 0.0;
    for (std::size_t i = 0; i < n_eval; ++i) {
      if (i > 0) {
        if (i % 64 == 0) {
          window = 0.0;
          for (std::size_t j = 0; j < q; ++j) window += inc[i + j];
        } else {
          window += inc[i + q - 1] - inc[i - 1];
        }
      }
      acc += f(window * inv_sigma);
    }
    out[p] = delta * acc;
  }
  return out;
}

void write_csv(const PathBundle& bundle, std::ostream& out) {
  out << "path_id,step,increment\n";
  for (std::size_t p = 0; p < bundle.n_paths; ++p) {
    const auto inc = bundle.row(p);
    for (std::size_t j = 0; j < bundle.n_steps; ++j) {
      out << (bundle.first_path + p) << ',' << j << ',' << text::digits17(inc[j]) << '\n';
    }
  }
}

}  // namespace gpclt
