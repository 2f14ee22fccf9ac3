#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace gpclt {

/// Truncated Taylor series c_0 + c_1 t + ... + c_N t^N in a small offset t.
///
/// Used to evaluate second differences of sigma^2 far from the origin without
/// the cancellation that the direct three-point formula suffers when the lag
/// is much larger than the step.
template <std::size_t N>
class Taylor {
 public:
  static constexpr std::size_t order = N;

  Taylor() = default;

  static Taylor constant(double value) {
    Taylor t;
    t.c_[0] = value;
    return t;
  }

  /// The identity map t -> x0 + t.
  static Taylor variable(double x0) {
    Taylor t;
    t.c_[0] = x0;
    if constexpr (N >= 1) t.c_[1] = 1.0;
    return t;
  }

  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }

  Taylor operator-() const {
    Taylor r;
    for (std::size_t i = 0; i <= N; ++i) r.c_[i] = -c_[i];
    return r;
  }

  friend Taylor operator+(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (std::size_t i = 0; i <= N; ++i) r.c_[i] = a.c_[i] + b.c_[i];
    return r;
  }

  friend Taylor operator-(const Taylor& a, const Taylor& b) { return a + (-b); }

  friend Taylor operator*(double s, const Taylor& a) {
    Taylor r;
    for (std::size_t i = 0; i <= N; ++i) r.c_[i] = s * a.c_[i];
    return r;
  }

  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (std::size_t n = 0; n <= N; ++n) {
      double acc = 0.0;
      for (std::size_t k = 0; k <= n; ++k) acc += a.c_[k] * b.c_[n - k];
      r.c_[n] = acc;
    }
    return r;
  }

  friend Taylor log(const Taylor& a) {
    Taylor r;
    r.c_[0] = std::log(a.c_[0]);
    for (std::size_t n = 1; n <= N; ++n) {
      double acc = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        acc += static_cast<double>(k) * r.c_[k] * a.c_[n - k];
      }
      r.c_[n] = (a.c_[n] - acc / static_cast<double>(n)) / a.c_[0];
    }
    return r;
  }

  friend Taylor exp(const Taylor& a) {
    Taylor r;
    r.c_[0] = std::exp(a.c_[0]);
    for (std::size_t n = 1; n <= N; ++n) {
      double acc = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        acc += static_cast<double>(k) * a.c_[k] * r.c_[n - k];
      }
      r.c_[n] = acc / static_cast<double>(n);
    }
    return r;
  }

  /// a^p for a positive constant term.
  friend Taylor pow(const Taylor& a, double p) { return exp(p * log(a)); }

 private:
  std::array<double, N + 1> c_{};
};

}  // namespace gpclt
