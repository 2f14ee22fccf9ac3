#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gpclt/hermite.hpp"
#include "gpclt/sigma_models.hpp"

namespace gpclt {

/// Uniform grid of step delta = h / n_per_h starting at a. The process is
/// sampled on [a, b + h] so that every increment over h starting in [a, b)
/// is available.
struct GridSpec {
  double a = 0.0;
  double b = 1.0;
  double h = 1.0 / 64;
  int n_per_h = 8;

  double delta() const { return h / n_per_h; }
  /// Number of left endpoints a + i delta lying in [a, b).
  std::size_t n_eval() const;
  std::size_t n_steps() const { return n_eval() + static_cast<std::size_t>(n_per_h); }
  void validate() const;
};

enum class SamplingMethod { CirculantEmbedding, Levinson, DenseFactorization };
std::string to_string(SamplingMethod m);

struct PathBundle {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t first_path = 0;
  SamplingMethod method = SamplingMethod::CirculantEmbedding;
  // Smallest embedding eigenvalue over the largest; negatives above the
  // clipping threshold were set to zero.
  double min_eigen_ratio = 0.0;
  // Row-major, n_paths x n_steps.
  std::vector<double> increments;

  std::span<const double> row(std::size_t i) const {
    return {increments.data() + i * n_steps, n_steps};
  }
};

/// gamma(j) = phi_delta(j delta) for j = 0..max_lag.
std::vector<double> increment_autocov(const IncrementVarianceSpec& spec, double delta,
                                      std::size_t max_lag);

/// Eigenvalues of the circulant embedding of the Toeplitz matrix with first
/// row gamma(0..n-1), embedding size the smallest power of two >= 2n.
std::vector<double> embedding_spectrum(const IncrementVarianceSpec& spec, double delta,
                                       std::size_t n_steps);

inline constexpr double kClipThreshold = 1e-8;
inline constexpr double kJitter = 1e-12;

/// Draws paths first_path .. first_path + n_paths - 1 of the stream named by
/// seed. Path i depends only on (seed, i), never on the worker count.
PathBundle sample_increments(const IncrementVarianceSpec& spec, double delta,
                             std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
                             std::uint64_t first_path = 0, int threads = 0);
PathBundle sample_increments_serial(const IncrementVarianceSpec& spec, double delta,
                                    std::size_t n_steps, std::size_t n_paths,
                                    std::uint64_t seed, std::uint64_t first_path = 0);

PathBundle sample_paths(const IncrementVarianceSpec& spec, const GridSpec& grid,
                        std::size_t n_paths, std::uint64_t seed, int threads = 0);
PathBundle sample_paths_serial(const IncrementVarianceSpec& spec, const GridSpec& grid,
                               std::size_t n_paths, std::uint64_t seed);

/// Left-endpoint Riemann sum delta * sum_{a <= x_i < b} f((G(x_i+h) - G(x_i)) / sigma(h))
/// for each path.
std::vector<double> functional_I(const PathBundle& bundle, const FunctionSpec& f,
                                 const IncrementVarianceSpec& spec, const GridSpec& grid,
                                 double h);

void write_csv(const PathBundle& bundle, std::ostream& out);

}  // namespace gpclt
