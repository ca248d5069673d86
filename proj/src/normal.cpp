#include "berman/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "berman/quadrature.hpp"

namespace berman {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Plackett integrand in θ-space. The exponent is rearranged near |sin θ| = 1
// so that the (h-k)²/cos²θ blow-up is handled without 0/0.
double plackett_integrand(double h, double k, double theta) {
  const double s = std::sin(theta);
  const double c2 = (1.0 - s) * (1.0 + s);
  double expo;
  if (s >= 0.0) {
    const double d = h - k;
    const double lead = (d == 0.0) ? 0.0 : (c2 > 0.0 ? d * d / (2.0 * c2) : std::numeric_limits<double>::infinity());
    expo = lead + h * k / (1.0 + s);
  } else {
    const double d = h + k;
    const double lead = (d == 0.0) ? 0.0 : (c2 > 0.0 ? d * d / (2.0 * c2) : std::numeric_limits<double>::infinity());
    expo = lead - h * k / (1.0 - s);
  }
  return std::exp(-expo);
}

double plackett_integral(double h, double k, double theta_lo, double theta_hi, double tol) {
  if (theta_lo == theta_hi) return 0.0;
  const double sign = theta_hi > theta_lo ? 1.0 : -1.0;
  const double lo = std::min(theta_lo, theta_hi);
  const double hi = std::max(theta_lo, theta_hi);
  auto f = [h, k](double t) { return plackett_integrand(h, k, t); };
  const auto r = adaptive_simpson(f, lo, hi, tol * 2.0 * kPi, 50, 4);
  return sign * r.value / (2.0 * kPi);
}

double safe_asin(double r) {
  if (r >= 1.0) return 0.5 * kPi;
  if (r <= -1.0) return -0.5 * kPi;
  return std::asin(r);
}

}  // namespace

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) noexcept {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double normal_sf(double x) noexcept {
  if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
  return 0.5 * std::erfc(x * kInvSqrt2);
}

double normal_quantile(double p) noexcept {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
               1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
               0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
               0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
               7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0 ? -val : val;
}

double bvn_cdf(double h, double k, double rho, double tol) {
  if (h == -std::numeric_limits<double>::infinity() || k == -std::numeric_limits<double>::infinity()) return 0.0;
  if (h == std::numeric_limits<double>::infinity()) return normal_cdf(k);
  if (k == std::numeric_limits<double>::infinity()) return normal_cdf(h);
  if (rho >= 1.0) return normal_cdf(std::min(h, k));
  if (rho <= -1.0) return std::max(0.0, normal_cdf(h) - normal_sf(k));
  const double base = normal_cdf(h) * normal_cdf(k);
  if (rho == 0.0) return base;
  const double v = base + plackett_integral(h, k, 0.0, safe_asin(rho), tol);
  return std::clamp(v, 0.0, 1.0);
}

double bvn_cdf_difference(double h, double k, double rho1, double rho2, double tol) {
  if (std::isinf(h) || std::isinf(k)) return 0.0;  // Φ2 does not depend on ρ there
  return plackett_integral(h, k, safe_asin(rho2), safe_asin(rho1), tol);
}

}  // namespace berman
