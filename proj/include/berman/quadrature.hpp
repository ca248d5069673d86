#pragma once

#include <cmath>
#include <cstddef>

namespace berman {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;       // sum of Richardson error estimates over accepted panels
  bool converged = true;    // false if any panel hit the depth limit above its local tolerance
  std::size_t evaluations = 0;
};

namespace detail {

template <class F>
void simpson_panel(F& f, double a, double fa, double m, double fm, double b, double fb,
                   double whole, double tol, int depth, QuadResult& acc) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  acc.evaluations += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol || !(b - a > 0.0)) {
    if (depth <= 0 && std::abs(delta) > 15.0 * tol) acc.converged = false;
    acc.value += left + right + delta / 15.0;
    acc.error += std::abs(delta) / 15.0;
    return;
  }
  simpson_panel(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, acc);
  simpson_panel(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, acc);
}

}  // namespace detail

/// Adaptive Simpson with step-halving Richardson error control. The interval is
/// pre-split into `panels` equal pieces so narrow features are not skipped by the
/// first 5-point estimate; tolerance is shared in proportion to width.
template <class F>
QuadResult adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 40,
                            int panels = 8) {
  QuadResult acc;
  if (!(b > a)) return acc;
  const double h = (b - a) / panels;
  double x0 = a;
  double f0 = f(x0);
  acc.evaluations = 1;
  for (int i = 0; i < panels; ++i) {
    const double x2 = (i + 1 == panels) ? b : a + (i + 1) * h;
    const double x1 = 0.5 * (x0 + x2);
    const double f1 = f(x1);
    const double f2 = f(x2);
    acc.evaluations += 2;
    const double whole = (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2);
    detail::simpson_panel(f, x0, f0, x1, f1, x2, f2, whole, tol / panels, max_depth, acc);
    x0 = x2;
    f0 = f2;
  }
  return acc;
}

}  // namespace berman
