#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "berman/comparison_bounds.hpp"
#include "berman/gaussian_core.hpp"
#include "berman/scaling.hpp"

namespace berman {

/// Event {lower_i < S_i X_i ≤ upper_i for all i}. Thresholds may be infinite;
/// lower_i = -v_i.
struct RectangleSpec {
  std::vector<double> upper;
  std::vector<double> lower;
  Coupling coupling = Coupling::Independent;

  static RectangleSpec one_sided(std::vector<double> u, Coupling coupling);
  /// lower = -v.
  static RectangleSpec two_sided(std::vector<double> u, const std::vector<double>& v, Coupling coupling);

  std::size_t dim() const noexcept { return upper.size(); }
  /// min over finite |u_i|, |v_i|; +∞ if every threshold is infinite.
  double w() const noexcept;
  /// BadSpec unless sizes match, lower_i < upper_i, no NaN, coupling set.
  void validate(std::size_t dim) const;
};

struct MCOptions {
  unsigned workers = 0;
  /// Pairs every Gaussian draw z with -z inside the same replication.
  bool antithetic = false;
};

struct MCEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  bool antithetic = false;
  bool coupled = false;
};

inline constexpr std::size_t kMinReps = 1000;

/// Replication r uses row r of the Gaussian and scaling streams, so the result
/// is a pure function of (inputs, seed). Reductions are exact integer counts.
MCEstimate mc_rectangle_prob(const CorrelationModel& model, const ScalingModel& scaling, const RectangleSpec& spec,
                             std::size_t reps, std::uint64_t seed, const MCOptions& options = {});

/// Common random numbers: both models see the same z and the same scaling
/// draws; only the correlation factor differs.
MCEstimate mc_delta(const CorrelationModel& lambda1, const CorrelationModel& lambda2, const ScalingModel& scaling,
                    const RectangleSpec& spec, std::size_t reps, std::uint64_t seed, const MCOptions& options = {});

struct QuadValue {
  double value = 0.0;
  double error = 0.0;
};

inline constexpr std::size_t kMaxQuadDim = 3;

/// Deterministic oracle for dim ≤ 3. Atomic scaling laws are summed exactly;
/// continuous laws are integrated over the quantile level t ∈ (0,1). For
/// independent dim-3 scaling the Gaussian coordinates are integrated outermost
/// against the per-coordinate scaled-interval probabilities instead.
QuadValue quad_rectangle_prob(const CorrelationModel& model, const ScalingModel& scaling, const RectangleSpec& spec,
                              double tol = 1e-6);

/// Quadrature value of P(rect | Λ1) - P(rect | Λ2), computed as one integral
/// of Gaussian-rectangle differences where the layering allows it.
QuadValue quad_delta(const CorrelationModel& lambda1, const CorrelationModel& lambda2, const ScalingModel& scaling,
                     const RectangleSpec& spec, double tol = 1e-6);

/// P(lower < X ≤ upper) for a standard Gaussian vector of dim ≤ 3 with
/// correlation entries R (row-major dim×dim).
double gaussian_rectangle(std::span<const double> lower, std::span<const double> upper, std::span<const double> R,
                          double tol = 1e-10);

/// P(rect | R1) - P(rect | R2) along the path R(θ) = θR1 + (1-θ)R2, whose
/// derivative has closed-form terms for dim ≤ 3.
double gaussian_rectangle_difference(std::span<const double> lower, std::span<const double> upper,
                                     std::span<const double> R1, std::span<const double> R2, double tol = 1e-12);

/// Kolmogorov–Smirnov statistic of a sorted sample against `cdf`.
double ks_distance(std::span<const double> sorted_sample, const std::function<double(double)>& cdf);

}  // namespace berman
