#include "berman/gaussian_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "berman/error.hpp"
#include "berman/parallel.hpp"

namespace berman {

namespace {

constexpr double kZeroPivot = 1e-14;

}  // namespace

double CorrelationModel::entry(std::size_t i, std::size_t j) const noexcept {
  if (kind_ == CorrelationKind::Explicit) return dense_[i * dim_ + j];
  const std::size_t lag = i > j ? i - j : j - i;
  return lag < kernel_.size() ? kernel_[lag] : 0.0;
}

double CorrelationModel::factor(std::size_t i, std::size_t j) const noexcept {
  if (j > i || i - j > band_) return 0.0;
  return lower_[i * (band_ + 1) + (j + band_ - i)];
}

void CorrelationModel::apply_factor(std::span<const double> z, std::span<double> x) const noexcept {
  const std::size_t w = band_ + 1;
  for (std::size_t i = 0; i < dim_; ++i) {
    const std::size_t k0 = i > band_ ? i - band_ : 0;
    const double* row = lower_.data() + i * w + (k0 + band_ - i);
    double acc = 0.0;
    for (std::size_t k = k0; k <= i; ++k) acc += row[k - k0] * z[k];
    x[i] = acc;
  }
}

void CorrelationModel::factorize() {
  const std::size_t n = dim_;
  const std::size_t w = band_ + 1;
  lower_.assign(n * w, 0.0);
  auto L = [&](std::size_t i, std::size_t j) -> double& { return lower_[i * w + (j + band_ - i)]; };

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j0 = i > band_ ? i - band_ : 0;
    for (std::size_t j = j0; j <= i; ++j) {
      double s = entry(i, j);
      const std::size_t k0 = std::max(j0, j > band_ ? j - band_ : std::size_t{0});
      for (std::size_t k = k0; k < j; ++k) s -= L(i, k) * L(j, k);
      if (j < i) {
        const double d = L(j, j);
        L(i, j) = d > 0.0 ? std::clamp(s / d, -1.0, 1.0) : 0.0;
      } else {
        if (s < -kPsdTolerance) {
          std::ostringstream msg;
          msg << "Cholesky pivot " << s << " at index " << i << " is below -" << kPsdTolerance;
          throw MathError(ErrorKind::NotPSD, msg.str());
        }
        L(i, i) = s > kZeroPivot ? std::sqrt(s) : 0.0;
      }
    }
  }

  residual_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j0 = i > band_ ? i - band_ : 0;
    for (std::size_t j = j0; j <= i; ++j) {
      double s = 0.0;
      const std::size_t k0 = std::max(j0, j > band_ ? j - band_ : std::size_t{0});
      for (std::size_t k = k0; k <= j; ++k) s += L(i, k) * L(j, k);
      residual_ = std::max(residual_, std::abs(s - entry(i, j)));
    }
  }
  if (residual_ > kPsdTolerance) {
    std::ostringstream msg;
    msg << "semidefinite factor reconstructs the matrix only to " << residual_;
    throw MathError(ErrorKind::NotPSD, msg.str());
  }
}

CorrelationModel validate_correlation(const std::vector<std::vector<double>>& raw) {
  const std::size_t n = raw.size();
  if (n == 0) throw MathError(ErrorKind::NotSquare, "empty matrix");
  for (const auto& row : raw) {
    if (row.size() != n) throw MathError(ErrorKind::NotSquare, "row length differs from row count");
  }
  CorrelationModel m;
  m.dim_ = n;
  m.kind_ = CorrelationKind::Explicit;
  m.dense_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(std::abs(raw[i][i] - 1.0) <= kSymmetryTolerance)) {
      std::ostringstream msg;
      msg << "diagonal entry " << i << " is " << raw[i][i];
      throw MathError(ErrorKind::NotUnitDiagonal, msg.str());
    }
    m.dense_[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double a = raw[i][j];
      const double b = raw[j][i];
      if (!std::isfinite(a) || !std::isfinite(b) || std::abs(a - b) > kSymmetryTolerance) {
        std::ostringstream msg;
        msg << "entries (" << i << "," << j << ") and (" << j << "," << i << ") differ by " << std::abs(a - b);
        throw MathError(ErrorKind::AsymmetryTooLarge, msg.str());
      }
      const double avg = 0.5 * (a + b);
      m.dense_[i * n + j] = avg;
      m.dense_[j * n + i] = avg;
    }
  }
  m.band_ = n - 1;
  m.factorize();
  return m;
}

CorrelationModel CorrelationModel::from_kernel(std::vector<double> kernel, std::size_t n, CorrelationKind kind) {
  if (n == 0) throw MathError(ErrorKind::NotSquare, "dimension must be positive");
  kernel.resize(std::min(kernel.size(), n));
  while (kernel.size() > 1 && kernel.back() == 0.0) kernel.pop_back();
  CorrelationModel m;
  m.dim_ = n;
  m.kind_ = kind;
  m.kernel_ = std::move(kernel);
  m.band_ = m.kernel_.size() - 1;
  return m;
}

CorrelationModel stationary_correlation(const std::function<double(std::size_t)>& kernel, std::size_t n) {
  if (n == 0) throw MathError(ErrorKind::NotSquare, "dimension must be positive");
  std::vector<double> values(n);
  for (std::size_t j = 0; j < n; ++j) values[j] = kernel(j);
  if (std::abs(values[0] - 1.0) > kSymmetryTolerance) {
    throw MathError(ErrorKind::NotUnitDiagonal, "kernel(0) must equal 1");
  }
  values[0] = 1.0;
  for (std::size_t j = 1; j < n; ++j) {
    if (!(std::abs(values[j]) <= 1.0)) {
      std::ostringstream msg;
      msg << "kernel(" << j << ") = " << values[j] << " is not a correlation";
      throw MathError(ErrorKind::NotPSD, msg.str());
    }
  }
  auto m = CorrelationModel::from_kernel(std::move(values), n, CorrelationKind::Stationary);
  m.factorize();
  return m;
}

double hr_correlation(double delta, double n) {
  const double rho = 1.0 - delta / std::log(n);
  return std::clamp(rho, kHrClampFloor, 1.0);
}

CorrelationModel hr_array_correlation(std::span<const double> delta, std::size_t n, std::size_t cutoff) {
  if (n < 2) throw MathError(ErrorKind::BadSpec, "hr-array requires n >= 2");
  if (delta.size() < cutoff) throw MathError(ErrorKind::InvalidDelta, "fewer δ values than the cutoff");
  std::vector<double> values(std::min(cutoff + 1, n), 0.0);
  values[0] = 1.0;
  std::size_t clamps = 0;
  const double log_n = std::log(static_cast<double>(n));
  for (std::size_t j = 1; j < values.size(); ++j) {
    const double d = delta[j - 1];
    if (!(d > 0.0) || !std::isfinite(d)) {
      std::ostringstream msg;
      msg << "δ_" << j << " = " << d << " must be a positive real";
      throw MathError(ErrorKind::InvalidDelta, msg.str());
    }
    const double rho = 1.0 - d / log_n;
    if (rho < kHrClampFloor) ++clamps;
    values[j] = std::clamp(rho, kHrClampFloor, 1.0);
  }
  auto m = CorrelationModel::from_kernel(std::move(values), n, CorrelationKind::HrArray);
  m.delta_.assign(delta.begin(), delta.begin() + static_cast<std::ptrdiff_t>(cutoff));
  m.clamp_events_ = clamps;
  try {
    m.factorize();
  } catch (const MathError& e) {
    std::ostringstream msg;
    msg << e.detail() << " (hr-array n=" << n << ", cutoff=" << cutoff << ", clamped=" << clamps << ")";
    throw MathError(ErrorKind::NotPSD, msg.str());
  }
  return m;
}

void draw_gaussian_row(const CorrelationModel& model, CounterStream& rng, std::span<double> z,
                       std::span<double> x) {
  for (std::size_t j = 0; j < model.dim(); ++j) z[j] = rng.normal();
  model.apply_factor(z, x);
}

GaussianSample sample_gaussian_rows(const CorrelationModel& model, std::uint64_t first_row, std::size_t count,
                                    std::uint64_t seed, std::uint32_t stream, unsigned workers) {
  GaussianSample out;
  out.reps = count;
  out.dim = model.dim();
  out.seed = seed;
  out.stream = stream;
  out.first_row = first_row;
  out.draws.resize(count * model.dim());
  parallel_chunks(chunk_count(count), workers, [&](std::size_t chunk) {
    std::vector<double> z(model.dim());
    const std::size_t r0 = chunk * kChunkRows;
    const std::size_t r1 = std::min(count, r0 + kChunkRows);
    for (std::size_t r = r0; r < r1; ++r) {
      CounterStream rng(seed, stream, first_row + r);
      draw_gaussian_row(model, rng, z, std::span<double>(out.draws.data() + r * out.dim, out.dim));
    }
  });
  return out;
}

GaussianSample sample_gaussian(const CorrelationModel& model, std::size_t reps, std::uint64_t seed,
                               std::uint32_t stream, unsigned workers) {
  if (reps == 0) throw MathError(ErrorKind::BadSpec, "reps must be at least 1");
  return sample_gaussian_rows(model, 0, reps, seed, stream, resolve_workers(static_cast<int>(workers)));
}

}  // namespace berman
