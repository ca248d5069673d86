#include "berman/evt_limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "berman/error.hpp"
#include "berman/normal.hpp"
#include "berman/parallel.hpp"
#include "berman/quadrature.hpp"
#include "berman/rng.hpp"

namespace berman {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_n(double n) {
  if (!(n >= 3.0) || !std::isfinite(n)) {
    std::ostringstream msg;
    msg << "norming constants need n >= 3 (ln ln n > 0), got " << n;
    throw MathError(ErrorKind::ParamOutOfRange, msg.str());
  }
}

// Composite Simpson estimate used only to scale the adaptive tolerance.
template <class F>
double coarse_simpson(F& f, double lo, double hi, int intervals = 2000) {
  const double h = (hi - lo) / intervals;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return acc * h / 3.0;
}

template <class F>
double relative_integral(F&& f, double lo, double hi, double rel_tol) {
  const double rough = std::abs(coarse_simpson(f, lo, hi));
  if (rough == 0.0) return 0.0;
  return adaptive_simpson(f, lo, hi, rel_tol * rough, 40, 64).value;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return kNaN;
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : kNaN;
}

}  // namespace

double gumbel(double x) noexcept {
  if (x == kInf) return 1.0;
  if (x == -kInf) return 0.0;
  return std::exp(-std::exp(-x));
}

double husler_reiss(double x, double y, double lambda) {
  if (std::isnan(lambda) || lambda < 0.0) throw MathError(ErrorKind::ParamOutOfRange, "λ must lie in [0, ∞]");
  if (x == -kInf || y == -kInf) return 0.0;
  if (x == kInf) return gumbel(y);
  if (y == kInf) return gumbel(x);
  if (lambda == kInf) return gumbel(x) * gumbel(y);
  if (lambda == 0.0) return gumbel(std::min(x, y));
  const double ex = std::exp(-x) * normal_cdf(lambda + (y - x) / (2.0 * lambda));
  const double ey = std::exp(-y) * normal_cdf(lambda + (x - y) / (2.0 * lambda));
  return std::exp(-ex - ey);
}

NormingConstants norming_classical(double n) {
  require_n(n);
  const double two_ln = 2.0 * std::log(n);
  NormingConstants k;
  k.n = n;
  k.regime = "classical";
  k.a = 1.0 / std::sqrt(two_ln);
  k.b = std::sqrt(two_ln) - 0.5 * k.a * (std::log(std::log(n)) + std::log(4.0 * kPi));
  return k;
}

NormingConstants norming_A(double n, double c, double tau) {
  require_n(n);
  if (!(c > 0.0) || !(tau >= 0.0)) throw MathError(ErrorKind::ParamOutOfRange, "need c > 0 and τ >= 0");
  const double two_ln = 2.0 * std::log(n);
  NormingConstants k;
  k.n = n;
  k.regime = "A";
  k.a = 1.0 / std::sqrt(two_ln);
  const double lead = std::log(c / std::sqrt(2.0 * kPi) * boost::math::tgamma(1.0 + tau));
  k.b = std::sqrt(two_ln) + k.a * (lead - (2.0 * tau + 1.0) / 2.0 * (std::log(std::log(n)) + std::log(2.0)));
  return k;
}

NormingConstants norming_B(double n, double c_B, double alpha, double L, double p) {
  require_n(n);
  if (!(c_B > 0.0) || !(L > 0.0) || !(p > 0.0) || !std::isfinite(alpha)) {
    throw MathError(ErrorKind::ParamOutOfRange, "need c_B, L, p > 0 and finite α");
  }
  const double ln_n = std::log(n);
  const double Q = std::pow(p * L, 1.0 / (2.0 + p));
  const double T = 0.5 * Q * Q + L * std::pow(Q, -p);
  const double varpi = c_B / std::sqrt(2.0 + p) * std::pow(Q, -alpha);
  const double e = (2.0 + p) / (2.0 * p);
  NormingConstants k;
  k.n = n;
  k.regime = "B";
  k.a = e * std::pow(T, -e) * std::pow(ln_n, (2.0 - p) / (2.0 * p));
  k.b = std::pow(ln_n / T, e) + k.a * (alpha / p * std::log(ln_n) - alpha / p * std::log(T) + std::log(varpi));
  return k;
}

NormingConstants norming_for(const ScalingModel& model, double n) {
  if (model.regime() == Regime::A) {
    const auto& k = model.constants_A();
    return norming_A(n, k.c, k.tau);
  }
  const auto& k = model.constants_B();
  return norming_B(n, k.c_B, k.alpha, k.L, k.p);
}

double scaled_tail(const ScalingModel& model, double u, double rel_tol) {
  if (!(u > 0.0)) throw MathError(ErrorKind::EvaluationDomain, "scaled tail needs u > 0");
  if (model.is_discrete()) {
    double acc = 0.0;
    for (const auto& a : model.atoms()) acc += a.value > 0.0 ? a.mass * normal_sf(u / a.value) : 0.0;
    return acc;
  }
  if (model.regime() == Regime::A) {
    // x = u + y/u, v = 1 - e^{-y}: P = φ(u)/u ∫_0^1 exp(-y²/(2u²)) P(S > u²/(u²+y)) dv.
    const double u2 = u * u;
    auto f = [&](double v) {
      const double y = -std::log1p(-std::min(v, 1.0 - 1e-16));
      return std::exp(-y * y / (2.0 * u2)) * model.sf(u2 / (u2 + y));
    };
    return normal_pdf(u) / u * relative_integral(f, 0.0, 1.0, rel_tol);
  }
  // Unbounded S: integrate φ(x) P(S > u/x) over x around its peak.
  auto g = [&](double x) { return x > 0.0 ? normal_pdf(x) * model.sf(u / x) : 0.0; };
  double peak_x = 1.0, peak = 0.0;
  for (double lx = -6.0; lx <= std::log(u + 50.0); lx += 0.01) {
    const double x = std::exp(lx);
    const double v = g(x);
    if (v > peak) {
      peak = v;
      peak_x = x;
    }
  }
  if (peak == 0.0) return 0.0;
  return relative_integral(g, 0.0, peak_x + 40.0, rel_tol);
}

double w_covariance(std::span<const double> delta, std::size_t i, std::size_t j) {
  if (i < 2 || j < 2) throw MathError(ErrorKind::BadSpec, "W indices start at 2");
  const std::size_t need = std::max(i, j) - 1;
  if (delta.size() < need) throw MathError(ErrorKind::InvalidDelta, "not enough δ values for the W index");
  auto d = [&](std::size_t k) { return k == 0 ? 0.0 : delta[k - 1]; };
  const double di = d(i - 1);
  const double dj = d(j - 1);
  if (!(di > 0.0) || !(dj > 0.0)) throw MathError(ErrorKind::InvalidDelta, "δ values must be positive");
  if (i == j) return 1.0;
  const std::size_t lag = i > j ? i - j : j - i;
  return (di + dj - d(lag)) / (2.0 * std::sqrt(di * dj));
}

CorrelationModel w_correlation(const ExtremalIndexSpec& spec) {
  if (spec.k_max > kMaxTruncation) {
    throw MathError(ErrorKind::TruncationTooDeep, "k_max " + std::to_string(spec.k_max) + " exceeds 50");
  }
  if (spec.k_max < 2) throw MathError(ErrorKind::BadSpec, "no W variables for k_max < 2");
  const std::size_t d = spec.k_max - 1;
  if (spec.delta.size() < d) throw MathError(ErrorKind::InvalidDelta, "need δ_1 .. δ_{k_max-1}");
  std::vector<std::vector<double>> raw(d, std::vector<double>(d));
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      const double v = w_covariance(spec.delta, a + 2, b + 2);
      if (std::abs(v) > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "E(W_" << a + 2 << " W_" << b + 2 << ") = " << v << " is not a correlation";
        throw MathError(ErrorKind::NotPSD, msg.str());
      }
      raw[a][b] = v;
    }
  }
  return validate_correlation(raw);
}

ThetaEstimate extremal_index_mc(const ExtremalIndexSpec& spec, std::size_t reps, std::uint64_t seed,
                                unsigned workers) {
  if (spec.k_max > kMaxTruncation) {
    throw MathError(ErrorKind::TruncationTooDeep, "k_max " + std::to_string(spec.k_max) + " exceeds 50");
  }
  ThetaEstimate est;
  est.k_max = spec.k_max;
  est.method = ThetaMethod::MonteCarlo;
  est.reps = reps;
  if (spec.k_max <= 1) return est;
  if (reps < 2) throw MathError(ErrorKind::BadSpec, "need at least two replications");
  const auto W = w_correlation(spec);
  const std::size_t d = W.dim();
  const auto moments = sum_rows(reps, resolve_workers(static_cast<int>(workers)), [&](std::size_t r) -> std::int64_t {
    thread_local std::vector<double> z, w;
    z.resize(d);
    w.resize(d);
    CounterStream rng(seed, streams::kExtremal, r);
    const double half_e = 0.5 * rng.exponential();
    draw_gaussian_row(W, rng, z, w);
    for (std::size_t k = 0; k < d; ++k) {
      const double dk = spec.delta[k];
      if (!(half_e + std::sqrt(dk) * w[k] <= dk)) return 0;
    }
    return 1;
  });
  const double n = static_cast<double>(reps);
  const double p = static_cast<double>(moments.sum) / n;
  est.value = p;
  est.std_error = std::sqrt(std::max(0.0, p * (1.0 - p)) / (n - 1.0));
  return est;
}

ThetaEstimate extremal_index_quad(const ExtremalIndexSpec& spec, double tol) {
  ThetaEstimate est;
  est.k_max = spec.k_max;
  est.method = ThetaMethod::Quad1D;
  if (spec.k_max <= 1) return est;
  if (spec.k_max != 2) throw MathError(ErrorKind::BadSpec, "1-D quadrature covers k_max = 2 only");
  if (spec.delta.empty() || !(spec.delta[0] > 0.0)) throw MathError(ErrorKind::InvalidDelta, "need δ_1 > 0");
  const double d1 = spec.delta[0];
  const double s = std::sqrt(d1);
  // v = 1 - e^{-t} turns e^{-t} dt into dv on (0, 1).
  auto f = [&](double v) {
    const double t = -std::log1p(-std::min(v, 1.0 - 1e-16));
    return normal_cdf((d1 - 0.5 * t) / s);
  };
  const auto res = adaptive_simpson(f, 0.0, 1.0, tol, 40, 16);
  est.value = res.value;
  est.std_error = res.error;
  return est;
}

ArrayMaximaSample simulate_array_maxima(std::span<const double> delta, std::size_t J, const ScalingModel& scaling,
                                        std::size_t n, std::size_t reps, std::uint64_t seed, unsigned workers,
                                        Coupling coupling) {
  if (coupling == Coupling::None) throw MathError(ErrorKind::BadSpec, "array maxima need a coupling");
  if (scaling.regime() != Regime::A) throw MathError(ErrorKind::WrongRegime, "array maxima need a regime A law");
  if (scaling.mode() != ConstantMode::Asymptotic) {
    throw MathError(ErrorKind::BadSpec, "array maxima need exact asymptotic tail constants");
  }
  if (reps == 0) throw MathError(ErrorKind::BadSpec, "reps must be at least 1");
  const auto model = hr_array_correlation(delta, n, J);
  ArrayMaximaSample out;
  out.norming = norming_for(scaling, static_cast<double>(n));
  out.clamp_events = model.clamp_events();
  out.values.resize(reps);
  parallel_chunks(reps, resolve_workers(static_cast<int>(workers)), [&](std::size_t r) {
    thread_local std::vector<double> z, x;
    z.resize(n);
    x.resize(n);
    CounterStream g(seed, streams::kGaussian, r);
    draw_gaussian_row(model, g, z, x);
    CounterStream sc(seed, streams::kScaling, r);
    double m;
    if (coupling == Coupling::Comonotone) {
      m = scaling.quantile(sc.uniform()) * *std::max_element(x.begin(), x.end());
    } else {
      m = -kInf;
      for (double v : x) m = std::max(m, scaling.quantile(sc.uniform()) * v);
    }
    out.values[r] = (m - out.norming.b) / out.norming.a;
  });
  return out;
}

double hr_lambda0(const HRSpec& hr, const NormingConstants& norming) {
  if (std::isnan(hr.lambda) || hr.lambda < 0.0) throw MathError(ErrorKind::ParamOutOfRange, "λ must lie in [0, ∞]");
  if (hr.lambda == kInf) return 0.0;
  const double l0 = 1.0 - 2.0 * hr.lambda * hr.lambda * norming.a / norming.b;
  if (!(l0 >= -1.0 && l0 <= 1.0)) {
    std::ostringstream msg;
    msg << "λ0(n) = " << l0 << " leaves [-1, 1]; λ = " << hr.lambda << " is too large for n = " << norming.n;
    throw MathError(ErrorKind::ParamOutOfRange, msg.str());
  }
  return l0;
}

BivariateMissingSample simulate_bivariate_missing(const HRSpec& hr, const ScalingModel& scaling,
                                                  const MissingDataSpec& miss, std::size_t n, std::size_t reps,
                                                  std::uint64_t seed, unsigned workers) {
  if (scaling.regime() != Regime::B) throw MathError(ErrorKind::WrongRegime, "bivariate maxima need a regime B law");
  if (!(miss.eta > 0.0 && miss.eta <= 1.0)) throw MathError(ErrorKind::BadEta, "η must lie in (0, 1]");
  if (reps == 0) throw MathError(ErrorKind::BadSpec, "reps must be at least 1");
  if (n < 3) throw MathError(ErrorKind::ParamOutOfRange, "n must be at least 3");
  BivariateMissingSample out;
  out.norming = norming_for(scaling, static_cast<double>(n));
  out.lambda0 = hr_lambda0(hr, out.norming);
  out.eta = miss.eta;
  out.rows.resize(reps);
  const double l0 = out.lambda0;
  const double comp = std::sqrt(std::max(0.0, 1.0 - l0 * l0));
  const double a = out.norming.a;
  const double b = out.norming.b;
  parallel_chunks(reps, resolve_workers(static_cast<int>(workers)), [&](std::size_t r) {
    CounterStream g(seed, streams::kGaussian, r);
    CounterStream sc(seed, streams::kScaling, r);
    CounterStream mk(seed, streams::kMask, r);
    double obs_max[2] = {-kInf, -kInf}, obs_min[2] = {kInf, kInf};
    double all_max[2] = {-kInf, -kInf}, all_min[2] = {kInf, kInf};
    bool any = false;
    for (std::size_t k = 0; k < n; ++k) {
      const double z1 = g.normal();
      const double z2 = g.normal();
      const double s = scaling.quantile(sc.uniform());
      const double y[2] = {s * z1, s * (l0 * z1 + comp * z2)};
      bool observed;
      if (miss.kind == MaskKind::Bernoulli) {
        observed = mk.uniform() < miss.eta;
      } else {
        observed = std::floor((k + 1) * miss.eta) > std::floor(k * miss.eta);
      }
      for (int c = 0; c < 2; ++c) {
        all_max[c] = std::max(all_max[c], y[c]);
        all_min[c] = std::min(all_min[c], y[c]);
        if (observed) {
          obs_max[c] = std::max(obs_max[c], y[c]);
          obs_min[c] = std::min(obs_min[c], y[c]);
        }
      }
      any |= observed;
    }
    if (!any) obs_min[0] = obs_min[1] = -kInf;  // both extremes sit at the lower support point
    auto& row = out.rows[r];
    for (int c = 0; c < 2; ++c) {
      row[c] = (obs_max[c] - b) / a;
      row[2 + c] = (-obs_min[c] - b) / a;
      row[4 + c] = (all_max[c] - b) / a;
      row[6 + c] = (-all_min[c] - b) / a;
    }
  });
  return out;
}

double missing_mixture_cdf(const std::array<double, 4>& x, const std::array<double, 4>& y, double lambda,
                           double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw MathError(ErrorKind::BadEta, "η must lie in (0, 1]");
  return std::pow(husler_reiss(x[0], x[1], lambda), eta) * std::pow(husler_reiss(y[0], y[1], lambda), eta) *
         std::pow(husler_reiss(x[2], x[3], lambda), 1.0 - eta) * std::pow(husler_reiss(y[2], y[3], lambda), 1.0 - eta);
}

double empirical_missing_cdf(const BivariateMissingSample& sample, const std::array<double, 4>& x,
                             const std::array<double, 4>& y) {
  if (sample.rows.empty()) throw MathError(ErrorKind::BadSpec, "empty sample");
  auto below = [](double v, double t) { return t == kInf || v < t; };
  std::size_t hits = 0;
  for (const auto& r : sample.rows) {
    hits += r[0] <= x[0] && r[1] <= x[1] && below(r[2], y[0]) && below(r[3], y[1]) && r[4] <= x[2] &&
            r[5] <= x[3] && below(r[6], y[2]) && below(r[7], y[3]);
  }
  return static_cast<double>(hits) / static_cast<double>(sample.rows.size());
}

ArrayDiagnostics check_array_conditions(std::span<const double> delta, std::size_t J, double tau,
                                        std::span<const double> n_grid, const Schedule& schedule, std::size_t m) {
  if (!(schedule.rho_l > 0.0 && schedule.rho_l < schedule.rho_r && schedule.rho_r < 1.0)) {
    throw MathError(ErrorKind::ScheduleInvalid, "need 0 < ρl < ρr < 1");
  }
  if (m < 1) throw MathError(ErrorKind::ScheduleInvalid, "m must be at least 1");
  if (n_grid.empty()) throw MathError(ErrorKind::ScheduleInvalid, "empty n-grid");
  if (delta.size() < J) throw MathError(ErrorKind::InvalidDelta, "fewer δ values than J");
  if (!(tau >= 0.0)) throw MathError(ErrorKind::ParamOutOfRange, "τ must be non-negative");
  for (std::size_t j = 0; j < J; ++j) {
    if (!(delta[j] > 0.0)) throw MathError(ErrorKind::InvalidDelta, "δ values must be positive");
  }
  ArrayDiagnostics out;
  std::vector<double> ns, lr, rn, e2, e3;
  for (double n : n_grid) {
    if (!(n >= 3.0) || !std::isfinite(n)) throw MathError(ErrorKind::ScheduleInvalid, "grid values must be >= 3");
    const double ln_n = std::log(n);
    const double lln = std::log(ln_n);
    const double c_n = 2.0 * ln_n - (2.0 * tau + 1.0) * lln;
    if (!(c_n > 0.0)) throw MathError(ErrorKind::EvaluationDomain, "c_n is not positive at this n");
    const auto r_n = static_cast<std::size_t>(std::floor(std::pow(n, schedule.rho_r)));
    const auto l_n = static_cast<std::size_t>(std::floor(std::pow(n, schedule.rho_l)));
    if (l_n < 1) throw MathError(ErrorKind::ScheduleInvalid, "l_n = 0 on this grid");
    const auto n_int = static_cast<std::size_t>(std::floor(n));
    auto rho = [&](std::size_t j) { return j <= J ? hr_correlation(delta[j - 1], n) : 0.0; };

    double ii = 0.0;
    for (std::size_t j = l_n; j <= std::min(J, n_int); ++j) {
      const double a = std::abs(rho(j));
      if (a == 0.0) continue;
      ii += std::exp(2.0 * ln_n - std::log(static_cast<double>(r_n)) - tau * std::log(c_n) + std::log(a) +
                     tau * std::log1p(a) - 0.5 * std::log1p(-a * a) - c_n / (1.0 + a));
    }
    auto term3 = [&](double q) {
      return std::exp(-(1.0 - q) / (1.0 + q) * ln_n + (tau * (1.0 - q) - q) / (1.0 + q) * lln -
                      0.5 * std::log1p(-q * q));
    };
    double iii = 0.0;
    for (std::size_t j = m; j <= std::min(J, r_n); ++j) iii += term3(rho(j));
    const std::size_t first_zero = std::max(m, J + 1);
    if (r_n >= first_zero) iii += static_cast<double>(r_n - first_zero + 1) * term3(0.0);

    const ConditionRow row{n,  r_n, l_n, c_n, static_cast<double>(l_n) / static_cast<double>(r_n),
                           static_cast<double>(r_n) / n, ii, iii};
    out.rows.push_back(row);
    ns.push_back(n);
    lr.push_back(row.l_over_r);
    rn.push_back(row.r_over_n);
    e2.push_back(ii);
    e3.push_back(iii);
  }
  out.slope_l_over_r = least_squares_slope(ns, lr);
  out.slope_r_over_n = least_squares_slope(ns, rn);
  out.slope_ii = least_squares_slope(ns, e2);
  out.slope_iii = least_squares_slope(ns, e3);
  return out;
}

}  // namespace berman
