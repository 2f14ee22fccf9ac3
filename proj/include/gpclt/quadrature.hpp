#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gpclt/errors.hpp"

namespace gpclt::quad {

struct Options {
  double abs_tol = 1e-10;
  // Optional relative target; the run stops at max(abs_tol, rel_tol * |value|).
  double rel_tol = 0.0;
  std::size_t max_panels = 100000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t panels = 0;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double centr = 0.5 * (a + b);
  const double hlgth = 0.5 * (b - a);
  const double fc = f(centr);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  std::array<double, 7> fv1{}, fv2{};
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = hlgth * kXgk[j];
    const double f1 = f(centr - dx);
    const double f2 = f(centr + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (std::size_t j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }
  const double scale = std::abs(hlgth);
  resk *= hlgth;
  resg *= hlgth;
  resabs *= scale;
  resasc *= scale;
  double err = std::abs(resk - resg);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {a, b, resk, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over
/// [breaks.front(), breaks.back()], with every interior break point kept as a
/// panel boundary. The worst panel is bisected until the summed error
/// estimate meets the target or the panel budget is exhausted, in which case
/// QuadratureError is thrown.
template <class F>
Result integrate(F&& f, std::span<const double> breaks, const Options& opt = {}) {
  if (breaks.size() < 2) return {};
  std::vector<detail::Panel> heap;
  heap.reserve(64);
  auto worse = [](const detail::Panel& x, const detail::Panel& y) {
    return x.error < y.error;
  };
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) heap.push_back(detail::gk15(f, breaks[i], breaks[i + 1]));
  }
  std::make_heap(heap.begin(), heap.end(), worse);

  auto totals = [&heap] {
    double v = 0.0, e = 0.0;
    for (const auto& p : heap) {
      v += p.value;
      e += p.error;
    }
    return std::pair{v, e};
  };

  auto [value, error] = totals();
  std::size_t since_resum = 0;
  while (!heap.empty()) {
    const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
    if (error <= target) break;
    if (heap.size() >= opt.max_panels) {
      throw QuadratureError("error target " + std::to_string(target) +
                            " not reached within " + std::to_string(opt.max_panels) +
                            " panels (estimate " + std::to_string(error) + ")");
    }
    std::pop_heap(heap.begin(), heap.end(), worse);
    const detail::Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("panel width underflow near " + std::to_string(worst.a));
    }
    const auto left = detail::gk15(f, worst.a, mid);
    const auto right = detail::gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), worse);
    // Running sums drift; resum periodically.
    if (++since_resum == 256) {
      std::tie(value, error) = totals();
      since_resum = 0;
    }
  }

  // Final sum in left-to-right panel order so the value does not depend on
  // heap layout.
  std::sort(heap.begin(), heap.end(),
            [](const detail::Panel& x, const detail::Panel& y) { return x.a < y.a; });
  Result res;
  for (const auto& p : heap) {
    res.value += p.value;
    res.error += p.error;
  }
  res.panels = heap.size();
  return res;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
  const std::array<double, 2> br{a, b};
  return integrate(std::forward<F>(f), std::span<const double>(br), opt);
}

}  // namespace gpclt::quad
