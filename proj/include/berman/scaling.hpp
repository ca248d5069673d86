#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace berman {

enum class Regime { A, B };

enum class LawKind {
  Uniform,
  Beta,
  TwoPoint,
  Degenerate,
  UserCdfA,
  Exponential,
  Weibull,
  Gamma,
  UserCdfB,
};

/// Bound mode treats c as an upper constant (enough for the comparison
/// bounds); asymptotic mode asserts P(S > 1 - 1/u) ~ c u^{-τ} exactly, which the
/// norming constants of the array limit need.
enum class ConstantMode { Bound, Asymptotic };

struct TailConstantsA {
  double c = 1.0;
  double tau = 0.0;
};

struct TailConstantsB {
  double c_B = 1.0;
  double alpha = 0.0;
  double L = 1.0;
  double p = 1.0;
};

struct Atom {
  double value;
  double mass;
};

/// Tagged law of the positive scaling variable S. Regime A laws live on [0,1]
/// with a power tail at 1; regime B laws live on (0,∞) with a Weibull-type tail.
class ScalingModel {
 public:
  static ScalingModel uniform();
  static ScalingModel beta(double a, double b);
  /// Atom λ with mass 1-c and atom 1 with mass c.
  static ScalingModel two_point(double lambda, double c);
  /// S ≡ 1, i.e. no scaling.
  static ScalingModel degenerate();
  /// Piecewise-linear CDF through (x_k, F_k) on [0,1], ending at (1,1).
  static ScalingModel user_cdf_A(std::vector<double> x, std::vector<double> F, TailConstantsA declared,
                                 ConstantMode mode = ConstantMode::Bound);
  static ScalingModel exponential(double rate);
  static ScalingModel weibull(double shape, double scale);
  /// Shape k, rate β.
  static ScalingModel gamma(double shape, double rate);
  /// Piecewise-linear CDF through (x_k, F_k) on (0, x_K]; beyond x_K the
  /// survival follows the declared Weibull-type tail, glued continuously.
  static ScalingModel user_cdf_B(std::vector<double> x, std::vector<double> F, TailConstantsB declared);

  Regime regime() const noexcept { return regime_; }
  LawKind law() const noexcept { return law_; }
  ConstantMode mode() const noexcept { return mode_; }
  std::string name() const;

  /// WrongRegime when called on the other regime.
  const TailConstantsA& constants_A() const;
  const TailConstantsB& constants_B() const;

  /// Purely atomic laws (two-point, degenerate) are integrated as finite sums.
  bool is_discrete() const noexcept { return !atoms_.empty(); }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }

  double cdf(double s) const;
  /// P(S > s).
  double sf(double s) const;
  /// Generalized inverse of the CDF on (0,1).
  double quantile(double t) const;

 private:
  double user_sf_B(double s) const;

  Regime regime_ = Regime::A;
  LawKind law_ = LawKind::Uniform;
  ConstantMode mode_ = ConstantMode::Asymptotic;
  std::vector<double> params_;
  TailConstantsA consts_A_{};
  TailConstantsB consts_B_{};
  std::vector<Atom> atoms_;
  std::vector<double> table_x_;
  std::vector<double> table_F_;
};

/// Exact P(S > 1 - 1/u) for regime A laws, u > 1.
double tail_A(const ScalingModel& model, double u);
/// Exact P(S > u) for regime B laws, u ≥ 0.
double tail_B(const ScalingModel& model, double u);

/// draws[r] = quantile(U) with U the first uniform of row r on (seed, stream).
std::vector<double> sample_scaling(const ScalingModel& model, std::size_t reps, std::uint64_t seed,
                                   std::uint32_t stream, unsigned workers = 0);

struct TailEstimatePoint {
  double level;                    // u (regime A) or survival level (regime B)
  double at;                       // evaluation point: u, or the quantile x
  std::vector<double> estimates;   // (c, τ) or (c_B, α, L, p)
};

struct TailDiagnostic {
  Regime regime = Regime::A;
  std::vector<double> declared;
  std::vector<TailEstimatePoint> points;
  /// Estimates at the largest u / smallest survival level.
  std::vector<double> final_estimates;
  double max_relative_deviation = 0.0;
  bool consistent = true;
};

/// Ratio estimates of the tail constants at u ∈ {1e2, 1e3, 1e4} (A) or at the
/// 1 - 1e-4 and 1 - 1e-6 quantiles (B). Regime A estimates τ from consecutive
/// decades; regime B estimates each constant holding the other declared ones
/// fixed. Inconsistent when any final estimate deviates by more than
/// 5%·max(1, |declared|).
TailDiagnostic tail_constant_estimate(const ScalingModel& model);

}  // namespace berman
