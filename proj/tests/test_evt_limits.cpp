#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "berman/error.hpp"
#include "berman/evt_limits.hpp"
#include "berman/normal.hpp"
#include "berman/probability_engine.hpp"
#include "berman/rng.hpp"

using namespace berman;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double phi_erfc(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("gumbel") {
  CHECK(gumbel(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(gumbel(-std::log(std::log(2.0))) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(gumbel(kInf) == 1.0);
  CHECK(gumbel(-kInf) == 0.0);
  CHECK(gumbel(50.0) == 1.0);
}

TEST_CASE("husler-reiss values") {
  CHECK(husler_reiss(0, 0, kInf) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(husler_reiss(0, 1, 0.0) == doctest::Approx(gumbel(0.0)).epsilon(1e-14));
  CHECK(husler_reiss(0, 1, 1e-9) == doctest::Approx(gumbel(0.0)).epsilon(1e-12));
  CHECK(husler_reiss(0, 0, 1.0) == doctest::Approx(std::exp(-2.0 * phi_erfc(1.0))).epsilon(1e-14));
  CHECK(husler_reiss(0, 0, 1.0) == doctest::Approx(0.18587).epsilon(1e-4));
  CHECK(husler_reiss(0.3, kInf, 2.0) == doctest::Approx(gumbel(0.3)).epsilon(1e-15));
  CHECK(husler_reiss(-kInf, 2.0, 2.0) == 0.0);
  CHECK(husler_reiss(1.0, 2.0, 1e6) == doctest::Approx(gumbel(1.0) * gumbel(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(husler_reiss(0, 0, -1.0), MathError);
}

TEST_CASE("husler-reiss is a bivariate cdf") {
  CounterStream rng(3, 0, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const double lam = std::exp(3.0 * rng.uniform() - 2.0);
    double x1 = 4 * rng.normal(), x2 = 4 * rng.normal(), y1 = 4 * rng.normal(), y2 = 4 * rng.normal();
    if (x1 > x2) std::swap(x1, x2);
    if (y1 > y2) std::swap(y1, y2);
    CHECK(husler_reiss(x1, y1, lam) == doctest::Approx(husler_reiss(y1, x1, lam)).epsilon(1e-14));
    CHECK(husler_reiss(x1, y1, lam) <= husler_reiss(x2, y1, lam) + 1e-15);
    CHECK(husler_reiss(x1, y1, lam) <= husler_reiss(x1, y2, lam) + 1e-15);
    const double rect = husler_reiss(x2, y2, lam) - husler_reiss(x1, y2, lam) - husler_reiss(x2, y1, lam) +
                        husler_reiss(x1, y1, lam);
    CHECK(rect >= -1e-14);
    const double h = husler_reiss(x1, y1, lam);
    CHECK(h >= gumbel(x1) * gumbel(y1) - 1e-15);
    CHECK(h <= gumbel(std::min(x1, y1)) + 1e-15);
  }
}

TEST_CASE("classical norming") {
  const auto N = norming_classical(100);
  const double l = std::log(100.0);
  CHECK(N.a == doctest::Approx(1 / std::sqrt(2 * l)).epsilon(1e-15));
  CHECK(N.a == doctest::Approx(0.32951).epsilon(1e-5));
  CHECK(N.b == doctest::Approx(std::sqrt(2 * l) - (std::log(l) + std::log(4 * kPi)) / (2 * std::sqrt(2 * l)))
                   .epsilon(1e-14));
  CHECK(N.b == doctest::Approx(2.36624).epsilon(1e-5));
  CHECK(N.u(1.0) == N.a + N.b);
  CHECK(N.regime == "classical");
  CHECK_THROWS_AS(norming_classical(std::exp(1.0)), MathError);
  CHECK_THROWS_AS(norming_classical(2.0), MathError);
  for (double n : {3.0, 50.0, 1e4, 1e9}) CHECK(norming_classical(n).a * std::sqrt(2 * std::log(n)) == doctest::Approx(1.0));
}

TEST_CASE("regime A norming") {
  for (double n : {10.0, 1e4, 1e8}) {
    const auto c = norming_classical(n);
    const auto A = norming_A(n, 1.0, 0.0);
    CHECK(A.a == c.a);
    CHECK(A.b == doctest::Approx(c.b).epsilon(1e-14));
  }
  const auto N = norming_A(1e4, 1.0, 1.0);
  const double l = std::log(1e4);
  const double expect = std::sqrt(2 * l) + (std::log(1 / std::sqrt(2 * kPi)) - 1.5 * (std::log(l) + std::log(2.0))) /
                                               std::sqrt(2 * l);
  CHECK(N.b == doctest::Approx(expect).epsilon(1e-14));
  CHECK(N.a == norming_classical(1e4).a);
  // Tail equation n P(S X > b_n) ≈ 1, with the logarithmic-rate finite-n gap.
  const double tail = 1e4 * scaled_tail(ScalingModel::uniform(), N.b);
  CHECK(std::abs(tail - 1.0) <= 0.15);
  CHECK(norming_for(ScalingModel::uniform(), 1e4).b == N.b);
  CHECK(norming_for(ScalingModel::degenerate(), 1e4).b == doctest::Approx(norming_classical(1e4).b).epsilon(1e-14));
}

TEST_CASE("regime B norming") {
  const double l = std::log(1e4);
  const auto N = norming_B(1e4, 1, 0, 1, 1);
  const double a = 1.5 * std::pow(1.5, -1.5) * std::sqrt(l);
  CHECK(N.a == doctest::Approx(a).epsilon(1e-14));
  CHECK(N.b == doctest::Approx(std::pow(l / 1.5, 1.5) + a * std::log(1 / std::sqrt(3.0))).epsilon(1e-14));
  CHECK(N.a == doctest::Approx(2.477948).epsilon(1e-6));
  CHECK(N.b == doctest::Approx(13.854011).epsilon(1e-7));
  CHECK(N.regime == "B");
  // α enters only through a_n (α/p)(ln ln n - ln T).
  const auto Na = norming_B(1e4, 1, 0.5, 1, 1);
  CHECK(Na.b - N.b == doctest::Approx(N.a * 0.5 * (std::log(l) - std::log(1.5))).epsilon(1e-12));
  CHECK(norming_for(ScalingModel::exponential(1), 1e4).b == N.b);
}

TEST_CASE("norming duality and conditional tail ratio") {
  const std::vector<ScalingModel> laws{ScalingModel::uniform(), ScalingModel::beta(1, 2), ScalingModel::exponential(1),
                                       ScalingModel::weibull(2, 1)};
  for (const auto& law : laws) {
    const auto N = norming_for(law, 1e6);
    for (double x : {0.0, 1.0}) CHECK(std::abs(1e6 * scaled_tail(law, N.u(x)) / std::exp(-x) - 1.0) <= 0.15);
  }
}

TEST_CASE("conditional tail ratio converges to exp(-y)") {
  // Leading finite-u factor for tail ~ u^{-(2τ+1)} e^{-u²/2}.
  auto finite_u = [](double u, double y, double tau) {
    return std::pow(1 + y / (u * u), -(2 * tau + 1)) * std::exp(-y * y / (2 * u * u));
  };
  for (const auto& law : {ScalingModel::uniform(), ScalingModel::beta(1, 2)}) {
    const double tau = law.constants_A().tau;
    for (double y : {0.5, 1.0}) {
      double prev = kInf;
      for (double n : {1e6, 1e9, 1e12, 1e15, 1e20}) {
        const double u = norming_for(law, n).b;
        const double ratio = scaled_tail(law, u + y / u) / scaled_tail(law, u) / std::exp(-y);
        CHECK(ratio == doctest::Approx(finite_u(u, y, tau)).epsilon(0.03));
        CHECK(std::abs(ratio - 1.0) < prev);
        prev = std::abs(ratio - 1.0);
      }
      CHECK(prev <= 0.10);
    }
  }
}

TEST_CASE("scaled tail against direct quadrature") {
  using boost::math::quadrature::gauss_kronrod;
  const auto U = ScalingModel::uniform();
  for (double u : {0.5, 2.0, 4.0}) {
    const double ref = gauss_kronrod<double, 61>::integrate([&](double s) { return normal_sf(u / s); }, 0.0, 1.0, 15, 1e-13);
    CHECK(scaled_tail(U, u) == doctest::Approx(ref).epsilon(1e-8));
  }
  const auto E = ScalingModel::exponential(1);
  for (double u : {0.5, 3.0, 12.0}) {
    const double ref = gauss_kronrod<double, 61>::integrate([&](double s) { return std::exp(-s) * normal_sf(u / s); },
                                                            0.0, kInf, 15, 1e-13);
    CHECK(scaled_tail(E, u) == doctest::Approx(ref).epsilon(1e-7));
  }
  const auto T = ScalingModel::two_point(0.5, 0.3);
  CHECK(scaled_tail(T, 2.0) == doctest::Approx(0.7 * normal_sf(4.0) + 0.3 * normal_sf(2.0)).epsilon(1e-14));
}

TEST_CASE("extremal index") {
  const std::vector<double> ones(10, 1.0);
  CHECK(w_covariance(ones, 2, 2) == 1.0);
  CHECK(w_covariance(ones, 2, 3) == doctest::Approx(0.5));

  CHECK(extremal_index_mc({{}, 1}, 1000, 1).value == 1.0);
  CHECK(extremal_index_quad({{}, 1}).value == 1.0);

  // ∫_0^∞ e^{-t} Φ((δ - t/2)/√δ) dt = 2Φ(√δ) - 1 after integrating by parts.
  for (double d : {0.01, 0.5, 1.0, 3.0}) {
    CHECK(std::abs(extremal_index_quad({{d}, 2}).value - (2 * phi_erfc(std::sqrt(d)) - 1)) < 1e-9);
  }
  CHECK(extremal_index_quad({{1.0}, 2}).value == doctest::Approx(0.683).epsilon(1e-3));
  CHECK(extremal_index_quad({{1e-6}, 2}).value < 1e-2);

  double prev = 0.0;
  for (double d = 0.1; d < 5.0; d += 0.3) {
    const double v = extremal_index_quad({{d}, 2}).value;
    CHECK(v > prev);
    CHECK(v <= 1.0);
    prev = v;
  }

  const auto mc = extremal_index_mc({{1.0}, 2}, 100000, 17);
  CHECK(std::abs(mc.value - extremal_index_quad({{1.0}, 2}).value) <= 3 * mc.std_error);
  CHECK(extremal_index_mc({{1.0}, 2}, 20000, 17, 1).value == extremal_index_mc({{1.0}, 2}, 20000, 17, 5).value);

  std::vector<double> lin(60);
  for (std::size_t k = 0; k < lin.size(); ++k) lin[k] = static_cast<double>(k + 1);
  CHECK_THROWS_AS(extremal_index_mc({lin, 51}, 1000, 1), MathError);
  CHECK_THROWS_AS(extremal_index_quad({lin, 3}), MathError);
  CHECK_THROWS_AS(w_correlation({{1.0, 10.0}, 3}), MathError);
  CHECK_THROWS_AS(extremal_index_mc({{1.0}, 3}, 1000, 1), MathError);
}

TEST_CASE("array maxima simulator") {
  const auto D = ScalingModel::degenerate();
  const std::vector<double> delta{5.0};
  const auto s0 = simulate_array_maxima(delta, 0, D, 10000, 2000, 7);
  auto v = s0.values;
  std::sort(v.begin(), v.end());
  CHECK(ks_distance(v, [](double x) { return gumbel(x); }) <= 0.05);

  // Cutoff 1 needs ϱ ≤ 1/2 to stay PSD, so δ₁ = 5 at n = 10⁴.
  const auto s1 = simulate_array_maxima(delta, 1, D, 10000, 2000, 7);
  auto logit = [](const std::vector<double>& xs) {
    const double F = static_cast<double>(std::count_if(xs.begin(), xs.end(), [](double x) { return x <= 1.0; })) /
                     static_cast<double>(xs.size());
    return -std::log(-std::log(F));
  };
  const double theta = extremal_index_quad({{5.0}, 2}).value;
  CHECK(std::abs(logit(s1.values) - logit(s0.values) + std::log(theta)) <= 0.1);

  CHECK(simulate_array_maxima(delta, 1, D, 2000, 50, 7, 1).values ==
        simulate_array_maxima(delta, 1, D, 2000, 50, 7, 6).values);
  // With S ≡ 1 the coupling makes no difference.
  CHECK(simulate_array_maxima(delta, 1, D, 2000, 50, 7, 2, Coupling::Independent).values ==
        simulate_array_maxima(delta, 1, D, 2000, 50, 7, 3, Coupling::Comonotone).values);
  const auto ind = simulate_array_maxima(delta, 0, ScalingModel::uniform(), 2000, 50, 7, 0, Coupling::Independent);
  CHECK(ind.values != simulate_array_maxima(delta, 0, ScalingModel::uniform(), 2000, 50, 7).values);
  CHECK_THROWS_AS(simulate_array_maxima(delta, 0, ScalingModel::exponential(1), 100, 10, 1), MathError);
  CHECK_THROWS_AS(simulate_array_maxima(delta, 0, D, 100, 0, 1), MathError);
  CHECK_THROWS_AS(simulate_array_maxima(std::vector<double>{1.0}, 1, D, 10000, 10, 1), MathError);
}

TEST_CASE("husler-reiss schedule") {
  for (double n : {1e3, 1e5}) {
    const auto N = norming_B(n, 1, 0, 1, 1);
    for (double lam : {0.5, 1.0, 1.5}) {
      const double l0 = hr_lambda0({lam}, N);
      CHECK(N.b / N.a * (1 - l0) == doctest::Approx(2 * lam * lam).epsilon(1e-12));
    }
    CHECK(hr_lambda0({kInf}, N) == 0.0);
  }
  CHECK_THROWS_AS(hr_lambda0({10.0}, norming_B(1e3, 1, 0, 1, 1)), MathError);
  CHECK_THROWS_AS(hr_lambda0({-1.0}, norming_B(1e3, 1, 0, 1, 1)), MathError);
}

TEST_CASE("missing-data mixture cdf") {
  const std::array<double, 4> x{0.2, 0.5, 0.7, 1.0};
  const std::array<double, 4> y{0.1, 0.3, 0.4, 0.9};
  const double lam = 1.0;
  CHECK(missing_mixture_cdf(x, y, lam, 1.0) ==
        doctest::Approx(husler_reiss(0.2, 0.5, lam) * husler_reiss(0.1, 0.3, lam)).epsilon(1e-14));
  CHECK(missing_mixture_cdf(x, {kInf, kInf, kInf, kInf}, lam, 0.5) ==
        doctest::Approx(std::sqrt(husler_reiss(0.2, 0.5, lam) * husler_reiss(0.7, 1.0, lam))).epsilon(1e-14));
  CHECK(missing_mixture_cdf({kInf, kInf, kInf, kInf}, {kInf, kInf, kInf, kInf}, lam, 0.3) == 1.0);
}

TEST_CASE("bivariate missing-data simulator") {
  const auto E = ScalingModel::exponential(1);
  const auto full = simulate_bivariate_missing({1.0}, E, {MaskKind::Bernoulli, 1.0}, 2000, 200, 9);
  for (const auto& r : full.rows) {
    CHECK(r[0] == r[4]);
    CHECK(r[1] == r[5]);
    CHECK(r[2] == r[6]);
    CHECK(r[3] == r[7]);
  }
  const auto half = simulate_bivariate_missing({1.0}, E, {MaskKind::Bernoulli, 0.5}, 2000, 200, 9, 1);
  CHECK(half.rows == simulate_bivariate_missing({1.0}, E, {MaskKind::Bernoulli, 0.5}, 2000, 200, 9, 7).rows);
  for (const auto& r : half.rows) {
    CHECK(r[0] <= r[4]);
    CHECK(r[1] <= r[5]);
    CHECK(r[2] <= r[6]);
    CHECK(r[3] <= r[7]);
  }
  const auto det = simulate_bivariate_missing({1.0}, E, {MaskKind::Deterministic, 0.3}, 1000, 20, 9);
  CHECK(det.eta == 0.3);
  CHECK(det.rows.size() == 20);

  CHECK(empirical_missing_cdf(half, {kInf, kInf, kInf, kInf}, {kInf, kInf, kInf, kInf}) == 1.0);
  CHECK(empirical_missing_cdf(half, {-kInf, kInf, kInf, kInf}, {kInf, kInf, kInf, kInf}) == 0.0);

  CHECK_THROWS_AS(simulate_bivariate_missing({1.0}, E, {MaskKind::Bernoulli, 0.0}, 100, 10, 1), MathError);
  CHECK_THROWS_AS(simulate_bivariate_missing({1.0}, E, {MaskKind::Bernoulli, 1.5}, 100, 10, 1), MathError);
  CHECK_THROWS_AS(simulate_bivariate_missing({1.0}, ScalingModel::uniform(), {}, 100, 10, 1), MathError);

  // Independence schedule factorizes; max and negated min share a limit.
  const auto ind = simulate_bivariate_missing({kInf}, E, {MaskKind::Bernoulli, 1.0}, 20000, 400, 21);
  for (double x : {0.0, 1.0}) {
    for (double y : {0.0, 1.0}) {
      const double F = empirical_missing_cdf(ind, {kInf, kInf, x, y}, {kInf, kInf, kInf, kInf});
      CHECK(std::abs(F - gumbel(x) * gumbel(y)) <= 0.08);
    }
  }
  std::vector<double> mx, mn;
  for (const auto& r : ind.rows) {
    mx.push_back(r[4]);
    mn.push_back(r[6]);
  }
  std::sort(mx.begin(), mx.end());
  std::sort(mn.begin(), mn.end());
  const double ks_max = ks_distance(mx, [](double x) { return gumbel(x); });
  const double ks_min = ks_distance(mn, [](double x) { return gumbel(x); });
  CHECK(ks_max <= 0.08);
  CHECK(ks_min <= 0.08);
}

TEST_CASE("array condition diagnostics") {
  const std::vector<double> delta{1.0};
  const std::vector<double> grid{1e3, 1e4};
  const auto d = check_array_conditions(delta, 1, 1.0, grid, {}, 2);
  REQUIRE(d.rows.size() == 2);
  CHECK(d.rows[1].r_n == 100);
  CHECK(d.rows[1].l_n == 6);
  CHECK(d.rows[1].l_over_r == doctest::Approx(0.06));
  CHECK(d.rows[1].c_n == doctest::Approx(2 * std::log(1e4) - 3 * std::log(std::log(1e4))));
  CHECK(d.rows[1].expr_iii < d.rows[0].expr_iii);
  CHECK(d.slope_iii < 0.0);
  // Only zero correlations past l_n: expression (ii) vanishes.
  CHECK(d.rows[1].expr_ii == 0.0);

  const auto z = check_array_conditions(delta, 0, 1.0, std::vector<double>{1e3, 1e4, 1e5}, {}, 1);
  for (const auto& r : z.rows) CHECK(r.expr_ii == 0.0);
  CHECK(std::isnan(z.slope_ii));

  std::vector<double> many(40, 2.0);
  const auto w = check_array_conditions(many, 40, 1.0, std::vector<double>{1e3, 1e4, 1e5, 1e6}, {0.1, 0.5}, 1);
  CHECK(w.rows[0].expr_ii > 0.0);

  CHECK_THROWS_AS(check_array_conditions(delta, 1, 1.0, grid, {0.5, 0.2}, 2), MathError);
  CHECK_THROWS_AS(check_array_conditions(delta, 1, 1.0, grid, {0.2, 1.0}, 2), MathError);
  CHECK_THROWS_AS(check_array_conditions(delta, 2, 1.0, grid, {}, 2), MathError);
}
