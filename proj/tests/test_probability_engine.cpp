#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <vector>

#include "berman/error.hpp"
#include "berman/normal.hpp"
#include "berman/probability_engine.hpp"

using namespace berman;
using boost::math::quadrature::gauss_kronrod;

namespace {

CorrelationModel corr2(double r) { return validate_correlation({{1, r}, {r, 1}}); }

CorrelationModel corr3(double a, double b, double c) { return validate_correlation({{1, a, b}, {a, 1, c}, {b, c, 1}}); }

// ∫₀¹ f(s) ds by 61-point Gauss–Kronrod with adaptive bisection.
template <class F>
double integrate01(F f) {
  return gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-12);
}

}  // namespace

TEST_CASE("rectangle spec") {
  const auto s = RectangleSpec::two_sided({2, 3}, {4, 1}, Coupling::Comonotone);
  CHECK(s.lower == std::vector<double>{-4, -1});
  CHECK(s.w() == 1.0);
  CHECK(RectangleSpec::one_sided({2, 3}, Coupling::Independent).w() == 2.0);
  CHECK(RectangleSpec::one_sided({INFINITY}, Coupling::Independent).w() == INFINITY);
  CHECK_THROWS_AS(s.validate(3), MathError);
  CHECK_THROWS_AS(RectangleSpec::two_sided({1}, {-2}, Coupling::Independent).validate(1), MathError);
  CHECK_THROWS_AS(RectangleSpec::one_sided({NAN}, Coupling::Independent).validate(1), MathError);
  CHECK_THROWS_AS(RectangleSpec::one_sided({1}, Coupling::None).validate(1), MathError);
}

TEST_CASE("quadrature against independent oracles") {
  const auto U = ScalingModel::uniform();
  const double one = integrate01([](double s) { return normal_cdf(1.0 / s); });
  CHECK(one == doctest::Approx(0.953003).epsilon(1e-6));

  const auto q1 = quad_rectangle_prob(validate_correlation({{1}}), U, RectangleSpec::one_sided({1}, Coupling::Independent), 1e-10);
  CHECK(std::abs(q1.value - one) < 1e-9);

  const auto eye = corr2(0.0);
  const auto qi = quad_rectangle_prob(eye, U, RectangleSpec::one_sided({1, 1}, Coupling::Independent), 1e-9);
  CHECK(std::abs(qi.value - one * one) < 1e-8);
  CHECK(one * one == doctest::Approx(0.908).epsilon(1e-3));

  const double com = integrate01([](double s) { return std::pow(normal_cdf(1.0 / s), 2); });
  const auto qc = quad_rectangle_prob(eye, U, RectangleSpec::one_sided({1, 1}, Coupling::Comonotone), 1e-9);
  CHECK(std::abs(qc.value - com) < 1e-8);

  const double rho = 0.6;
  const double comr = integrate01([&](double s) { return bvn_cdf(1.5 / s, 0.5 / s, rho); });
  const auto qr = quad_rectangle_prob(corr2(rho), U, RectangleSpec::one_sided({1.5, 0.5}, Coupling::Comonotone), 1e-9);
  CHECK(std::abs(qr.value - comr) < 1e-8);

  const double two = integrate01([](double s) { return normal_cdf(2.0 / s) - normal_cdf(-1.0 / s); });
  const auto q2 = quad_rectangle_prob(validate_correlation({{1}}), U, RectangleSpec::two_sided({2}, {1}, Coupling::Independent), 1e-10);
  CHECK(std::abs(q2.value - two) < 1e-9);

  // Two-point law is summed exactly.
  const auto T = ScalingModel::two_point(0.5, 0.3);
  const double tp = 0.7 * std::pow(normal_cdf(2.0), 2) + 0.3 * std::pow(normal_cdf(1.0), 2) ;
  const auto qt = quad_rectangle_prob(eye, T, RectangleSpec::one_sided({1, 1}, Coupling::Comonotone));
  CHECK(std::abs(qt.value - tp) < 1e-12);
  const double ti = std::pow(0.7 * normal_cdf(2.0) + 0.3 * normal_cdf(1.0), 2);
  const auto qti = quad_rectangle_prob(eye, T, RectangleSpec::one_sided({1, 1}, Coupling::Independent));
  CHECK(std::abs(qti.value - ti) < 1e-12);
}

TEST_CASE("coupling is irrelevant in one dimension") {
  const auto one = validate_correlation({{1}});
  for (const auto& law : {ScalingModel::uniform(), ScalingModel::beta(2, 3), ScalingModel::exponential(1)}) {
    const auto a = quad_rectangle_prob(one, law, RectangleSpec::two_sided({1.2}, {0.7}, Coupling::Independent), 1e-9);
    const auto b = quad_rectangle_prob(one, law, RectangleSpec::two_sided({1.2}, {0.7}, Coupling::Comonotone), 1e-9);
    CHECK(std::abs(a.value - b.value) < 1e-8);
    const auto ma = mc_rectangle_prob(one, law, RectangleSpec::two_sided({1.2}, {0.7}, Coupling::Independent), 20000, 5);
    const auto mb = mc_rectangle_prob(one, law, RectangleSpec::two_sided({1.2}, {0.7}, Coupling::Comonotone), 20000, 5);
    CHECK(ma.estimate == mb.estimate);
  }
}

TEST_CASE("gaussian rectangles") {
  const double lo2[] = {-INFINITY, -INFINITY}, up2[] = {2, 2};
  const double R5[] = {1, 0.5, 0.5, 1}, R0[] = {1, 0, 0, 1};
  CHECK(gaussian_rectangle(lo2, up2, R5) == doctest::Approx(0.95855268).epsilon(1e-8));
  CHECK(gaussian_rectangle_difference(lo2, up2, R5, R0) == doctest::Approx(0.00353538).epsilon(1e-6));

  // Dim 3 at independence is a product.
  const double lo3[] = {-1, -INFINITY, -0.5}, up3[] = {1, 0.3, INFINITY};
  const double I3[] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  const double prod = (normal_cdf(1) - normal_cdf(-1)) * normal_cdf(0.3) * normal_sf(-0.5);
  CHECK(std::abs(gaussian_rectangle(lo3, up3, I3) - prod) < 1e-10);

  // Exchangeable orthant: P(X1,X2,X3 ≤ 0) = 1/8 + 3 asin(r) / (4π).
  const double Rx[] = {1, 0.4, 0.4, 0.4, 1, 0.4, 0.4, 0.4, 1};
  const double lo0[] = {-INFINITY, -INFINITY, -INFINITY}, up0[] = {0, 0, 0};
  CHECK(std::abs(gaussian_rectangle(lo0, up0, Rx) - (0.125 + 3 * std::asin(0.4) / (4 * kPi))) < 1e-10);

  // Path difference agrees with the direct difference.
  const double Ra[] = {1, 0.3, -0.2, 0.3, 1, 0.5, -0.2, 0.5, 1};
  const double Rb[] = {1, -0.1, 0.4, -0.1, 1, 0.1, 0.4, 0.1, 1};
  const double lo[] = {-1.5, -0.7, -INFINITY}, up[] = {1.0, 2.0, 0.8};
  const double direct = gaussian_rectangle(lo, up, Ra, 1e-13) - gaussian_rectangle(lo, up, Rb, 1e-13);
  CHECK(std::abs(gaussian_rectangle_difference(lo, up, Ra, Rb) - direct) < 1e-9);
  CHECK(gaussian_rectangle_difference(lo, up, Ra, Ra) == 0.0);
}

TEST_CASE("delta: quadrature against Monte Carlo") {
  const auto D = ScalingModel::degenerate();
  const auto spec = RectangleSpec::one_sided({2, 2}, Coupling::Independent);
  const auto q = quad_delta(corr2(0.5), corr2(0.0), D, spec, 1e-10);
  CHECK(q.value == doctest::Approx(0.00353538).epsilon(1e-6));
  const auto m = mc_delta(corr2(0.5), corr2(0.0), D, spec, 200000, 11);
  CHECK(std::abs(m.estimate - q.value) <= 3 * m.std_error);
  CHECK(m.coupled);

  const auto same = quad_delta(corr2(0.3), corr2(0.3), ScalingModel::uniform(), spec);
  CHECK(same.value == 0.0);
  CHECK(mc_delta(corr2(0.3), corr2(0.3), ScalingModel::uniform(), spec, 2000, 1).estimate == 0.0);

  const auto U = ScalingModel::uniform();
  for (Coupling c : {Coupling::Independent, Coupling::Comonotone}) {
    const auto s3 = RectangleSpec::two_sided({1.5, 1.0, 2.0}, {1.0, 2.0, 1.2}, c);
    const auto A = corr3(0.5, 0.2, 0.3), B = corr3(0.0, 0.1, -0.2);
    const auto qd = quad_delta(A, B, U, s3, 1e-6);
    const auto md = mc_delta(A, B, U, s3, 200000, 3);
    CHECK(std::abs(md.estimate - qd.value) <= 3.5 * md.std_error + 1e-6);
    const auto pa = quad_rectangle_prob(A, U, s3, 1e-7), pb = quad_rectangle_prob(B, U, s3, 1e-7);
    CHECK(std::abs(pa.value - pb.value - qd.value) < 1e-6);
    const auto mp = mc_rectangle_prob(A, U, s3, 100000, 8);
    CHECK(std::abs(mp.estimate - pa.value) <= 3.5 * mp.std_error);
  }
}

TEST_CASE("monte carlo determinism and options") {
  const auto U = ScalingModel::beta(1, 2);
  const auto spec = RectangleSpec::one_sided({1.0, 0.5, 1.5, 2.0}, Coupling::Independent);
  const auto model = stationary_correlation([](std::size_t j) { return std::pow(0.5, j); }, 4);
  const auto a = mc_rectangle_prob(model, U, spec, 20000, 99, {.workers = 1});
  const auto b = mc_rectangle_prob(model, U, spec, 20000, 99, {.workers = 4});
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
  CHECK(mc_rectangle_prob(model, U, spec, 20000, 100).estimate != a.estimate);
  CHECK(a.reps == 20000);
  CHECK(a.seed == 99);

  const auto anti = mc_rectangle_prob(model, U, spec, 20000, 99, {.workers = 3, .antithetic = true});
  CHECK(anti.antithetic);
  CHECK(std::abs(anti.estimate - a.estimate) < 4 * std::hypot(a.std_error, anti.std_error));

  CHECK_THROWS_AS(mc_rectangle_prob(model, U, spec, 999, 1), MathError);
  CHECK_THROWS_AS(mc_rectangle_prob(model, U, RectangleSpec::one_sided({1}, Coupling::Independent), 1000, 1), MathError);
}

TEST_CASE("monotone in thresholds") {
  const auto model = corr3(0.4, 0.1, -0.3);
  const auto U = ScalingModel::exponential(2);
  double prev = -1.0;
  for (double u = 0.25; u <= 3.0; u += 0.25) {
    const auto q = quad_rectangle_prob(model, U, RectangleSpec::one_sided({u, u, u}, Coupling::Comonotone), 1e-7);
    CHECK(q.value >= prev);
    CHECK(q.value <= 1.0);
    prev = q.value;
  }
  CHECK_THROWS_AS(quad_rectangle_prob(validate_correlation({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}), U,
                                      RectangleSpec::one_sided({1, 1, 1, 1}, Coupling::Independent)),
                  MathError);
}

TEST_CASE("ks distance") {
  const std::vector<double> xs{0.1, 0.4, 0.7};
  const auto F = [](double x) { return std::clamp(x, 0.0, 1.0); };
  // max over i of max(i/n - F(x_i), F(x_i) - (i-1)/n).
  CHECK(ks_distance(xs, F) == doctest::Approx(0.3).epsilon(1e-12));
  const std::vector<double> one{0.5};
  CHECK(ks_distance(one, F) == doctest::Approx(0.5));
}
