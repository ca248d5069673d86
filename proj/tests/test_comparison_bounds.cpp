#include <doctest.h>

#include <cmath>
#include <vector>

#include "berman/comparison_bounds.hpp"
#include "berman/error.hpp"
#include "berman/normal.hpp"
#include "berman/rng.hpp"

using namespace berman;

namespace {

// Reference instance: n = 2, λ¹ = 0.5 against λ² = 0.
PairTerms reference_terms() {
  return pairwise_terms(validate_correlation({{1, 0.5}, {0.5, 1}}), validate_correlation({{1, 0}, {0, 1}}));
}

CorrelationModel random_correlation(CounterStream& rng, std::size_t d) {
  std::vector<std::vector<double>> B(d, std::vector<double>(d + 2));
  for (auto& row : B)
    for (auto& v : row) v = rng.normal();
  std::vector<std::vector<double>> R(d, std::vector<double>(d));
  std::vector<double> norm(d);
  for (std::size_t i = 0; i < d; ++i)
    for (double v : B[i]) norm[i] += v * v;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double c = 0.0;
      for (std::size_t k = 0; k < d + 2; ++k) c += B[i][k] * B[j][k];
      R[i][j] = i == j ? 1.0 : c / std::sqrt(norm[i] * norm[j]);
    }
  }
  return validate_correlation(R);
}

}  // namespace

TEST_CASE("pairwise terms") {
  const auto same = pairwise_terms(validate_correlation({{1, 0.3}, {0.3, 1}}), validate_correlation({{1, 0.3}, {0.3, 1}}));
  CHECK(same.pairs.empty());

  const auto t = reference_terms();
  REQUIRE(t.pairs.size() == 1);
  CHECK(t.pairs[0].A == doctest::Approx(0.523599).epsilon(1e-6));
  CHECK(t.pairs[0].rho == 0.5);

  const auto ends = pairwise_terms(validate_correlation({{1, 1}, {1, 1}}), validate_correlation({{1, -1}, {-1, 1}}));
  CHECK(ends.pairs[0].A == kPi);
  CHECK(ends.pairs[0].rho == 1.0);
  CHECK(safe_asin(1.0 + 1e-16) == kPi / 2);

  CHECK_THROWS_AS(pairwise_terms(validate_correlation({{1}}), validate_correlation({{1, 0}, {0, 1}})), MathError);
}

TEST_CASE("pairwise terms on banded models") {
  const auto a = stationary_correlation([](std::size_t j) { return std::pow(0.4, j); }, 50);
  const auto b = stationary_correlation([](std::size_t j) { return j == 0 ? 1.0 : (j == 1 ? 0.2 : 0.0); }, 50);
  const auto t = pairwise_terms(a, b);
  std::size_t expected = 0;
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = i + 1; j < 50; ++j) expected += a.entry(i, j) != b.entry(i, j);
  CHECK(t.pairs.size() == expected);
}

TEST_CASE("classical and introductory bounds") {
  const auto t = reference_terms();
  CHECK(berman_bound_classical(t, 2).value == doctest::Approx(0.0231611504).epsilon(1e-9));
  CHECK(bound_uniform_scaling(t, 2).value == berman_bound_classical(t, 2).value);
  CHECK(berman_bound_classical(PairTerms{}, 2).value == 0.0);
  CHECK(bound_uniform_scaling(PairTerms{}, 2).value == 0.0);
  CHECK(bound_uniform_scaling(PairTerms{2, {{0, 1, 0.7, 0.0}}}, 3).value ==
        doctest::Approx(2 / kPi * 0.7 * std::exp(-9.0)));

  CHECK(bound_exponential_scaling(t, 8, 0.5, 0.5).value == doctest::Approx(0.00180684613).epsilon(1e-9));
  CHECK(bound_exponential_scaling(PairTerms{}, 8, 0.5, 0.5).value == 0.0);
  CHECK(bound_exponential_scaling(t, 8, 0.999, 0.999).value > bound_exponential_scaling(t, 8, 0.9, 0.9).value);
  CHECK(bound_exponential_scaling(t, 8, 1 - 1e-9, 1 - 1e-9).value > 1e3);
  CHECK_THROWS_AS(bound_exponential_scaling(t, 8, 1.0, 0.5), MathError);
  CHECK_THROWS_AS(bound_exponential_scaling(t, 8, 0.5, 0.0), MathError);

  double prev = INFINITY;
  for (double w = 0.5; w < 30; w += 0.5) {
    const double v = berman_bound_classical(t, w).value;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("regime A theorem bounds") {
  const auto t = reference_terms();
  const auto U = ScalingModel::uniform();
  const auto kA = bound_constants(U.constants_A());
  CHECK(kA.K_A == doctest::Approx(2 / kPi).epsilon(1e-15));
  CHECK(kA.K_A_star == doctest::Approx(1 / kPi).epsilon(1e-15));

  const auto ind = bound_A_independent(t, 3, U, 0.0);
  CHECK(ind.value == doctest::Approx(2.29514090e-5).epsilon(1e-8));
  CHECK(ind.coupling == Coupling::Independent);
  CHECK_FALSE(ind.advisory);
  const auto com = bound_A_comonotone(t, 3, U, 0.0);
  CHECK(com.value == doctest::Approx(6.88542271e-5).epsilon(1e-8));

  // Comonotone exceeds independent once w^{2τ}(1+ρ)^{-τ} K*/K > 1.
  for (double w : {3.0, 5.0, 8.0}) CHECK(bound_A_comonotone(t, w, U, 0).value > bound_A_independent(t, w, U, 0).value);

  CHECK(bound_A_independent(t, 2.0, U).advisory);
  CHECK(bound_A_independent(t, 3, U).epsilon == 0.1);
  CHECK_THROWS_AS(bound_A_independent(t, 3, ScalingModel::exponential(1)), MathError);
  CHECK_THROWS_AS(bound_A_independent(t, 3, U, -0.1), MathError);
}

TEST_CASE("remark dominance for uniform scaling is exact") {
  const auto t = reference_terms();
  const auto U = ScalingModel::uniform();
  for (double w : {2.5, 3.0, 5.0, 10.0}) {
    const double ratio = bound_A_independent(t, w, U, 0.0).value / bound_uniform_scaling(t, w).value;
    CHECK(std::abs(ratio - std::pow(w, -4) * 2.25) <= 1e-12);
  }
  const double r5 = bound_A_independent(t, 5, U).value / bound_uniform_scaling(t, 5).value;
  const double r10 = bound_A_independent(t, 10, U).value / bound_uniform_scaling(t, 10).value;
  CHECK(r10 < r5);
  CHECK(r5 < 1.0);
}

TEST_CASE("regime B theorem bounds") {
  const auto t = reference_terms();
  const auto E = ScalingModel::exponential(1);
  const auto k = bound_constants(E.constants_B());
  CHECK(k.T == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(k.K_B == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(k.K_B_star == doctest::Approx(1.03414418852).epsilon(1e-11));
  CHECK(k.Q == doctest::Approx(1.0));
  CHECK(k.varpi_B == doctest::Approx(1 / std::sqrt(3.0)));

  CHECK(bound_B_independent(t, 8, E, 0.0).value == doctest::Approx(6.83291723e-5).epsilon(1e-8));
  CHECK(bound_B_comonotone(t, 8, E, 0.0).value == doctest::Approx(1.37165093e-3).epsilon(1e-8));
  CHECK(bound_B_comonotone(PairTerms{}, 8, E, 0.0).value == 0.0);
  CHECK_THROWS_AS(bound_B_comonotone(t, 8, ScalingModel::uniform()), MathError);

  // The T formula agrees with Q²/2 + L Q^{-p} for other parameters.
  const TailConstantsB other{2.0, 0.7, 0.4, 1.8};
  const auto ko = bound_constants(other);
  CHECK(ko.T == doctest::Approx(0.5 * ko.Q * ko.Q + other.L * std::pow(ko.Q, -other.p)).epsilon(1e-13));

  // Exponents per unit (1+ρ)^{-1/3} w^{2/3}: -3 against -1.890 for a = b = 1/2.
  double prev = INFINITY;
  for (double w : {6.0, 8.0, 10.0, 20.0, 40.0}) {
    const double r = bound_B_independent(t, w, E).value / bound_exponential_scaling(t, w, 0.5, 0.5).value;
    CHECK(r < prev);
    prev = r;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("bound invariants on random instances") {
  CounterStream rng(42, 0, 0);
  const std::vector<ScalingModel> laws{ScalingModel::uniform(), ScalingModel::beta(1, 2), ScalingModel::exponential(1),
                                       ScalingModel::weibull(2, 1)};
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 2 + trial % 4;
    const auto L1 = random_correlation(rng, d);
    const auto L2 = random_correlation(rng, d);
    const auto t12 = pairwise_terms(L1, L2);
    const auto t21 = pairwise_terms(L2, L1);
    for (const auto& p : t12.pairs) {
      CHECK(p.A >= 0.0);
      CHECK(p.A <= kPi);
      CHECK(p.rho >= 0.0);
      CHECK(p.rho <= 1.0);
    }
    const double w = 2.5 + 0.1 * trial;
    CHECK(berman_bound_classical(t12, w).value == berman_bound_classical(t21, w).value);
    for (const auto& law : laws) {
      for (Coupling c : {Coupling::Independent, Coupling::Comonotone}) {
        const auto a = theorem_bound(t12, w, law, c);
        const auto b = theorem_bound(t21, w, law, c);
        CHECK(a.value == doctest::Approx(b.value).epsilon(1e-14));
        double sum = 0.0;
        for (const auto& pc : a.contributions) sum += pc.contribution;
        CHECK(a.value == doctest::Approx(sum).epsilon(1e-14));
        // Strictly decreasing well past each regime's turning point.
        CHECK(theorem_bound(t12, w + 20, law, c).value < theorem_bound(t12, w + 10, law, c).value);
      }
    }
  }
}

TEST_CASE("corollary identity bound") {
  const auto U = ScalingModel::uniform();
  const auto eye = validate_correlation({{1, 0}, {0, 1}});
  CHECK(corollary_identity_bound(eye, 3, U, Coupling::Comonotone).corollary == 0.0);
  CHECK(corollary_identity_bound(eye, 3, U, Coupling::Comonotone).theorem.value == 0.0);

  CHECK(std::asin(0.5) / 0.5 == doctest::Approx(1.0471976).epsilon(1e-7));
  CHECK(std::asin(0.5) / 0.5 <= kPi / 2);

  const auto half = validate_correlation({{1, 0.5}, {0.5, 1}});
  const auto c = corollary_identity_bound(half, 3, U, Coupling::Comonotone, 0.0);
  CHECK(c.Q == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.corollary == doctest::Approx(0.5 / 9 * 0.5 * std::exp(-6.0)).epsilon(1e-12));
  CHECK(c.theorem.value == doctest::Approx(6.88542271e-5).epsilon(1e-8));

  const auto e = corollary_identity_bound(half, 8, ScalingModel::exponential(1), Coupling::Independent, 0.0);
  CHECK(e.Q == doctest::Approx(kPi / 2 * 4.0 / 3.0));
  CHECK(e.corollary > 0.0);
}

TEST_CASE("serialization") {
  const auto r = bound_A_independent(reference_terms(), 3, ScalingModel::uniform());
  const auto csv = bound_pairs_csv(r);
  CHECK(csv.rfind("i,j,A,rho,contribution\n0,1,", 0) == 0);
  const auto j = bound_summary_json(r);
  CHECK(j["family"] == "A-independent");
  CHECK(j["constants"]["K_B"].is_null());
  CHECK(j["value"].get<double>() == r.value);
}
