#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "berman/comparison_bounds.hpp"
#include "berman/gaussian_core.hpp"
#include "berman/scaling.hpp"

namespace berman {

/// Λ(x) = exp(-e^{-x}).
double gumbel(double x) noexcept;

/// Hüsler–Reiss H_λ(x, y); λ = 0 and λ = ∞ give the comonotone and
/// independent limits. Infinite arguments are exact.
double husler_reiss(double x, double y, double lambda);

struct NormingConstants {
  double a = 1.0;
  double b = 0.0;
  double n = 0.0;
  std::string regime;  // "classical", "A" or "B"

  double u(double x) const noexcept { return a * x + b; }
};

/// All three require n ≥ 3 so that ln ln n > 0.
NormingConstants norming_classical(double n);
NormingConstants norming_A(double n, double c, double tau);
NormingConstants norming_B(double n, double c_B, double alpha, double L, double p);
/// Dispatches on the model's regime using its declared constants.
NormingConstants norming_for(const ScalingModel& model, double n);

/// P(S·X > u) for X ~ N(0,1) independent of S, by 1-D quadrature with
/// relative accuracy `rel_tol`.
double scaled_tail(const ScalingModel& model, double u, double rel_tol = 1e-9);

/// E(W_i W_j) = (δ_{i-1} + δ_{j-1} - δ_{|i-j|}) / (2 sqrt(δ_{i-1} δ_{j-1})), i, j ≥ 2.
/// `delta` holds δ_1, δ_2, ... and δ_0 = 0.
double w_covariance(std::span<const double> delta, std::size_t i, std::size_t j);

inline constexpr std::size_t kMaxTruncation = 50;

struct ExtremalIndexSpec {
  std::vector<double> delta;  // δ_1 .. δ_{k_max - 1}
  std::size_t k_max = 2;
};

enum class ThetaMethod { MonteCarlo, Quad1D };

struct ThetaEstimate {
  double value = 1.0;
  double std_error = 0.0;
  std::size_t k_max = 1;
  ThetaMethod method = ThetaMethod::MonteCarlo;
  std::size_t reps = 0;
};

/// Covariance of (W_2, ..., W_{k_max}); NotPSD unless it is a valid correlation matrix.
CorrelationModel w_correlation(const ExtremalIndexSpec& spec);

/// ϑ_m = P(E/2 + sqrt(δ_{k-1}) W_k ≤ δ_{k-1}, 2 ≤ k ≤ k_max). Quad1D only for
/// k_max = 2, where ϑ = ∫_0^∞ e^{-t} Φ((δ_1 - t/2)/sqrt(δ_1)) dt.
ThetaEstimate extremal_index_mc(const ExtremalIndexSpec& spec, std::size_t reps, std::uint64_t seed,
                                unsigned workers = 0);
ThetaEstimate extremal_index_quad(const ExtremalIndexSpec& spec, double tol = 1e-10);

struct ArrayMaximaSample {
  NormingConstants norming;
  std::size_t clamp_events = 0;
  std::vector<double> values;  // (M_n - b_n)/a_n per replication
};

/// Rows of the hr-array with cutoff J, norming from the law's asymptotic tail
/// constants. Comonotone draws one S per replication (row); Independent draws
/// one S per array element.
ArrayMaximaSample simulate_array_maxima(std::span<const double> delta, std::size_t J, const ScalingModel& scaling,
                                        std::size_t n, std::size_t reps, std::uint64_t seed, unsigned workers = 0,
                                        Coupling coupling = Coupling::Comonotone);

struct HRSpec {
  double lambda = 1.0;  // λ = ∞ means λ0(n) = 0
};

/// λ0(n) = 1 - 2λ² a_n/b_n; ParamOutOfRange if that leaves [-1, 1].
double hr_lambda0(const HRSpec& hr, const NormingConstants& norming);

enum class MaskKind { Deterministic, Bernoulli };

struct MissingDataSpec {
  MaskKind kind = MaskKind::Bernoulli;
  /// Bernoulli probability, or the observed fraction of a deterministic mask.
  double eta = 1.0;
};

/// Columns, all normalized by (a_n, b_n): observed max (1), (2); observed
/// negated min (1), (2); full max (1), (2); full negated min (1), (2). The
/// negated min is (-m - b_n)/a_n so that {-u_n(y) < m} = {value < y}.
struct BivariateMissingSample {
  NormingConstants norming;
  double lambda0 = 0.0;
  double eta = 1.0;
  std::vector<std::array<double, 8>> rows;
};

inline constexpr std::array<const char*, 8> kBivariateColumns = {
    "max_obs_1", "max_obs_2", "negmin_obs_1", "negmin_obs_2", "max_1", "max_2", "negmin_1", "negmin_2"};

/// iid-in-k bivariate array with corr(X^(1), X^(2)) = λ0(n), one scaling draw
/// per vector, and observation indicators independent of everything else.
BivariateMissingSample simulate_bivariate_missing(const HRSpec& hr, const ScalingModel& scaling,
                                                  const MissingDataSpec& miss, std::size_t n, std::size_t reps,
                                                  std::uint64_t seed, unsigned workers = 0);

/// H^η(x1,x2) H^η(y1,y2) H^{1-η}(x3,x4) H^{1-η}(y3,y4); pass +∞ to drop a factor.
double missing_mixture_cdf(const std::array<double, 4>& x, const std::array<double, 4>& y, double lambda,
                           double eta);

/// Fraction of rows with max_obs ≤ (x1,x2), negmin_obs < (y1,y2), max ≤ (x3,x4), negmin < (y3,y4).
double empirical_missing_cdf(const BivariateMissingSample& sample, const std::array<double, 4>& x,
                             const std::array<double, 4>& y);

struct ConditionRow {
  double n;
  std::size_t r_n;
  std::size_t l_n;
  double c_n;
  double l_over_r;
  double r_over_n;
  double expr_ii;
  double expr_iii;
};

struct ArrayDiagnostics {
  std::vector<ConditionRow> rows;
  /// Least-squares slopes of log(value) against log(n); NaN when a series has
  /// fewer than two positive entries.
  double slope_l_over_r = 0.0;
  double slope_r_over_n = 0.0;
  double slope_ii = 0.0;
  double slope_iii = 0.0;
};

struct Schedule {
  double rho_l = 0.2;  // l_n = ⌊n^{ρl}⌋
  double rho_r = 0.5;  // r_n = ⌊n^{ρr}⌋
};

/// Trend diagnostic for the three array conditions over an n-grid; not a proof.
ArrayDiagnostics check_array_conditions(std::span<const double> delta, std::size_t J, double tau,
                                        std::span<const double> n_grid, const Schedule& schedule, std::size_t m);

}  // namespace berman
