#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "berman/rng.hpp"

namespace berman {

enum class CorrelationKind { Explicit, Stationary, HrArray };

/// Pivots in [-kPsdTolerance, kZeroPivot] are treated as exact zeros of a
/// semidefinite factor; anything more negative is NotPSD.
inline constexpr double kPsdTolerance = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kHrClampFloor = -1.0 + 1e-12;

/// Validated correlation matrix together with its lower-triangular factor.
/// Stationary and hr-array models store only the kernel ϱ_j and a banded
/// factor, so dimension 10^4 with a short kernel costs O(n·band).
class CorrelationModel {
 public:
  std::size_t dim() const noexcept { return dim_; }
  CorrelationKind kind() const noexcept { return kind_; }

  double entry(std::size_t i, std::size_t j) const noexcept;

  /// ϱ_0..ϱ_{len-1}; entries beyond the kernel are zero. Empty for explicit models.
  std::span<const double> kernel() const noexcept { return kernel_; }
  /// hr-array inputs δ_1..δ_J (δ_0 = 0 implied).
  std::span<const double> delta() const noexcept { return delta_; }
  /// Number of ϱ values clamped at -1 + 1e-12 (hr-array only).
  std::size_t clamp_events() const noexcept { return clamp_events_; }

  std::size_t bandwidth() const noexcept { return band_; }
  double factor(std::size_t i, std::size_t j) const noexcept;
  /// max |L·Lᵀ - entries| over the band, measured after factorization.
  double factorization_residual() const noexcept { return residual_; }

  /// x = L·z.
  void apply_factor(std::span<const double> z, std::span<double> x) const noexcept;

 private:
  friend CorrelationModel validate_correlation(const std::vector<std::vector<double>>& raw);
  friend CorrelationModel stationary_correlation(const std::function<double(std::size_t)>& kernel,
                                                 std::size_t n);
  friend CorrelationModel hr_array_correlation(std::span<const double> delta, std::size_t n,
                                               std::size_t cutoff);
  static CorrelationModel from_kernel(std::vector<double> kernel, std::size_t n, CorrelationKind kind);
  void factorize();

  std::size_t dim_ = 0;
  CorrelationKind kind_ = CorrelationKind::Explicit;
  std::vector<double> dense_;    // explicit: dim×dim row-major
  std::vector<double> kernel_;   // stationary / hr-array
  std::vector<double> delta_;
  std::size_t clamp_events_ = 0;
  std::size_t band_ = 0;
  std::vector<double> lower_;    // row i holds L[i][i-band .. i]
  double residual_ = 0.0;
};

/// Validates a square correlation matrix; symmetrizes by averaging when the
/// asymmetry is at rounding level.
CorrelationModel validate_correlation(const std::vector<std::vector<double>>& raw);

/// Toeplitz model entries[i][j] = kernel(|i-j|) for i, j < n.
CorrelationModel stationary_correlation(const std::function<double(std::size_t)>& kernel, std::size_t n);

/// ϱ_{n,j} = 1 - δ_j / ln n, clamped to [-1 + 1e-12, 1].
double hr_correlation(double delta, double n);

/// Hüsler–Reiss triangular-array row: ϱ_{n,j} from δ_j for j ≤ cutoff, zero
/// beyond. `delta` holds δ_1..δ_J with J ≥ cutoff.
CorrelationModel hr_array_correlation(std::span<const double> delta, std::size_t n, std::size_t cutoff);

/// Row-major block of draws; row r is L·z(seed, stream, first_row + r).
struct GaussianSample {
  std::size_t reps = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;
  std::uint64_t first_row = 0;
  std::vector<double> draws;

  double at(std::size_t r, std::size_t c) const noexcept { return draws[r * dim + c]; }
};

/// One correlated row from an already-positioned counter stream. `z` is
/// scratch of length dim.
void draw_gaussian_row(const CorrelationModel& model, CounterStream& rng, std::span<double> z,
                       std::span<double> x);

GaussianSample sample_gaussian_rows(const CorrelationModel& model, std::uint64_t first_row,
                                    std::size_t count, std::uint64_t seed, std::uint32_t stream,
                                    unsigned workers = 1);

GaussianSample sample_gaussian(const CorrelationModel& model, std::size_t reps, std::uint64_t seed,
                               std::uint32_t stream, unsigned workers = 0);

}  // namespace berman
