#include "berman/probability_engine.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "berman/error.hpp"
#include "berman/normal.hpp"
#include "berman/parallel.hpp"
#include "berman/quadrature.hpp"
#include "berman/rng.hpp"

namespace berman {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTinyVar = 1e-14;
constexpr double kEdge = 1e-16;
constexpr int kLayerDepth = 30;
constexpr double kZMax = 8.5;
constexpr unsigned kGkDepth = 12;

// Threshold for X_i once S_i = s has been divided out; s = 0 makes S_i X_i = 0.
double scaled_upper(double u, double s) {
  if (s > 0.0) return u / s;
  return u >= 0.0 ? kInf : -kInf;
}

double scaled_lower(double l, double s) {
  if (s > 0.0) return l / s;
  return l < 0.0 ? -kInf : kInf;
}

double interval_prob(double a, double b, double mu, double var) {
  if (!(a < b)) return 0.0;
  if (var <= kTinyVar) return (a < mu && mu <= b) ? 1.0 : 0.0;
  const double sd = std::sqrt(var);
  const double lo = (a - mu) / sd;
  const double hi = (b - mu) / sd;
  if (lo > 0.0) return normal_sf(lo) - normal_sf(hi);
  return normal_cdf(hi) - normal_cdf(lo);
}

// P(a1 < Y1 ≤ b1, a2 < Y2 ≤ b2) for a bivariate normal with the given moments.
double rect2(double a1, double b1, double a2, double b2, double mu1, double mu2, double var1, double var2, double r,
             double tol) {
  if (!(a1 < b1) || !(a2 < b2)) return 0.0;
  if (var1 <= kTinyVar) return interval_prob(a1, b1, mu1, 0.0) * interval_prob(a2, b2, mu2, var2);
  if (var2 <= kTinyVar) return interval_prob(a2, b2, mu2, 0.0) * interval_prob(a1, b1, mu1, var1);
  const double s1 = std::sqrt(var1);
  const double s2 = std::sqrt(var2);
  const double h[2] = {(a1 - mu1) / s1, (b1 - mu1) / s1};
  const double k[2] = {(a2 - mu2) / s2, (b2 - mu2) / s2};
  r = std::clamp(r, -1.0, 1.0);
  double p = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (h[i] == -kInf || k[j] == -kInf) continue;
      const double sign = (i == j) ? 1.0 : -1.0;
      p += sign * bvn_cdf(h[i], k[j], r, tol);
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

double clamp_level(double t) { return std::clamp(t, kEdge, 1.0 - kEdge); }

double rect3(std::span<const double> a, std::span<const double> b, std::span<const double> R, double tol) {
  for (int i = 0; i < 3; ++i) {
    if (!(a[i] < b[i])) return 0.0;
  }
  const double r12 = R[1], r13 = R[2], r23 = R[5];
  const double v2 = 1.0 - r12 * r12;
  const double v3 = 1.0 - r13 * r13;
  const double r = (v2 > kTinyVar && v3 > kTinyVar) ? (r23 - r12 * r13) / std::sqrt(v2 * v3) : 0.0;
  const double t0 = normal_cdf(a[0]);
  const double t1 = normal_cdf(b[0]);
  if (!(t1 > t0)) return 0.0;
  auto f = [&](double t) {
    const double x = normal_quantile(clamp_level(t));
    return rect2(a[1], b[1], a[2], b[2], r12 * x, r13 * x, v2, v3, r, tol * 1e-2);
  };
  return std::clamp(adaptive_simpson(f, t0, t1, tol, kLayerDepth).value, 0.0, 1.0);
}

double phi2(double x, double y, double r) {
  const double q = 1.0 - r * r;
  return std::exp(-(x * x - 2.0 * r * x * y + y * y) / (2.0 * q)) / (2.0 * kPi * std::sqrt(q));
}

// ∂P(a < X ≤ b)/∂r_ij for a dim-3 standard normal vector with correlation R.
double rect3_partial(std::span<const double> a, std::span<const double> b, const std::array<double, 9>& R, int i,
                     int j) {
  const int k = 3 - i - j;
  const double r = R[i * 3 + j];
  const double rik = R[i * 3 + k];
  const double rjk = R[j * 3 + k];
  const double q = 1.0 - r * r;
  const double bi = (rik - r * rjk) / q;
  const double bj = (rjk - r * rik) / q;
  const double var = 1.0 - (rik * bi + rjk * bj);
  const double ci[2] = {a[i], b[i]};
  const double cj[2] = {a[j], b[j]};
  double acc = 0.0;
  for (int si = 0; si < 2; ++si) {
    if (std::isinf(ci[si])) continue;
    for (int sj = 0; sj < 2; ++sj) {
      if (std::isinf(cj[sj])) continue;
      const double sign = (si == sj) ? 1.0 : -1.0;
      const double dens = phi2(ci[si], cj[sj], r);
      if (dens == 0.0) continue;
      acc += sign * dens * interval_prob(a[k], b[k], bi * ci[si] + bj * cj[sj], var);
    }
  }
  return acc;
}

std::vector<double> dense_entries(const CorrelationModel& m) {
  const std::size_t d = m.dim();
  std::vector<double> R(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) R[i * d + j] = m.entry(i, j);
  }
  return R;
}

void check_quad_dim(std::size_t d) {
  if (d > kMaxQuadDim) {
    throw MathError(ErrorKind::DimTooLarge, "quadrature oracle supports dimension <= 3, got " + std::to_string(d));
  }
}

void check_tol(const QuadValue& q, double tol) {
  if (!(q.error <= tol) || !std::isfinite(q.value)) {
    std::ostringstream msg;
    msg << "estimated error " << q.error << " exceeds tolerance " << tol;
    throw MathError(ErrorKind::TolUnreachable, msg.str());
  }
}

// Integrates kernel(s) over the scaling law: one shared level for comonotone
// coupling, one level per coordinate for independent coupling. Atomic laws are
// summed exactly. `levels` is the number of scaling variables.
template <class Kernel>
QuadValue integrate_scaling(const ScalingModel& scaling, std::size_t levels, std::size_t dim, bool shared, double tol,
                            Kernel&& kernel) {
  std::vector<double> s(dim, 1.0);
  QuadValue total;
  std::function<double(std::size_t, double)> layer = [&](std::size_t level, double layer_tol) -> double {
    if (level == levels) return kernel(std::span<const double>(s));
    auto assign = [&](double value) {
      if (shared) {
        std::fill(s.begin(), s.end(), value);
      } else {
        s[level] = value;
      }
    };
    if (scaling.is_discrete()) {
      double acc = 0.0;
      for (const auto& atom : scaling.atoms()) {
        assign(atom.value);
        acc += atom.mass * layer(level + 1, layer_tol);
      }
      return acc;
    }
    const bool innermost = level + 1 == levels;
    const double own_tol = innermost ? layer_tol : 0.5 * layer_tol;
    auto f = [&](double t) {
      assign(scaling.quantile(clamp_level(t)));
      return layer(level + 1, 0.5 * layer_tol);
    };
    const auto res = adaptive_simpson(f, 0.0, 1.0, own_tol, kLayerDepth);
    if (level == 0) total.error += res.error;
    return res.value;
  };
  total.value = layer(0, tol);
  return total;
}

void scaled_limits(const RectangleSpec& spec, std::span<const double> s, std::vector<double>& a,
                   std::vector<double>& b) {
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    a[i] = scaled_lower(spec.lower[i], s[i]);
    b[i] = scaled_upper(spec.upper[i], s[i]);
  }
}

// P(l < S x ≤ u) for a continuous scaling law.
double scaled_interval(const ScalingModel& scaling, double l, double u, double x) {
  if (x == 0.0) return (l < 0.0 && 0.0 <= u) ? 1.0 : 0.0;
  auto F = [&](double y) {
    if (y == kInf) return 1.0;
    if (y == -kInf) return 0.0;
    return scaling.cdf(y);
  };
  const double p = x > 0.0 ? F(u / x) - F(l / x) : F(l / x) - F(u / x);
  return std::max(p, 0.0);
}

// ∫ g(m + sd z) φ(z) dz over |z| ≤ kZMax, split where g has kinks in x.
template <class G>
QuadValue gauss_expect(G&& g, double m, double sd, std::span<const double> kinks, double tol) {
  std::array<double, 8> cuts{};
  std::size_t n = 0;
  cuts[n++] = -kZMax;
  for (double k : kinks) {
    const double z = (k - m) / sd;
    if (std::isfinite(z) && std::abs(z) < kZMax) cuts[n++] = z;
  }
  cuts[n++] = kZMax;
  std::sort(cuts.begin(), cuts.begin() + n);
  QuadValue q;
  auto f = [&](double z) { return g(m + sd * z) * normal_pdf(z); };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    double err = 0.0;
    q.value += gauss_kronrod<double, 21>::integrate(f, cuts[i], cuts[i + 1], kGkDepth, tol, &err);
    q.error += err;
  }
  return q;
}

// Independent dim-3 scaling with a continuous law: the Gaussian coordinates are
// integrated outermost (X = L z) against Π_i P(l_i < S x_i ≤ u_i).
QuadValue gaussian_outer3(const CorrelationModel& model, const ScalingModel& scaling, const RectangleSpec& spec,
                          double tol) {
  const double L00 = model.factor(0, 0), L10 = model.factor(1, 0), L11 = model.factor(1, 1);
  const double L20 = model.factor(2, 0), L21 = model.factor(2, 1), L22 = model.factor(2, 2);
  // h_i is smooth away from x = 0, l_i/s_max, u_i/s_max.
  const double smax = scaling.regime() == Regime::A ? 1.0 : kInf;
  std::array<std::array<double, 3>, 3> kinks{};
  for (std::size_t i = 0; i < 3; ++i) kinks[i] = {0.0, spec.lower[i] / smax, spec.upper[i] / smax};
  auto h = [&](std::size_t i, double x) { return scaled_interval(scaling, spec.lower[i], spec.upper[i], x); };
  double inner_err = 0.0;
  // Conditional on the earlier coordinates, coordinate i is m + sd z.
  auto last = [&](double m) {
    if (L22 == 0.0) return h(2, m);
    const auto q = gauss_expect([&](double x) { return h(2, x); }, m, L22, kinks[2], 0.25 * tol);
    inner_err = std::max(inner_err, q.error);
    return q.value;
  };
  auto middle = [&](double z0) {
    const double m1 = L10 * z0;
    auto g = [&](double x1) {
      const double h1 = h(1, x1);
      if (h1 == 0.0) return 0.0;
      const double z1 = L11 == 0.0 ? 0.0 : (x1 - m1) / L11;
      return h1 * last(L20 * z0 + L21 * z1);
    };
    if (L11 == 0.0) return g(m1);
    const auto q = gauss_expect(g, m1, L11, kinks[1], 0.25 * tol);
    inner_err = std::max(inner_err, q.error);
    return q.value;
  };
  auto outer = [&](double x0) {
    const double h0 = h(0, x0);
    if (h0 == 0.0) return 0.0;
    return h0 * middle(x0 / L00);
  };
  const auto res = gauss_expect(outer, 0.0, L00, kinks[0], 0.5 * tol);
  return {std::clamp(res.value, 0.0, 1.0), res.error + inner_err};
}

bool use_gaussian_outer(const ScalingModel& scaling, const RectangleSpec& spec) {
  return spec.coupling == Coupling::Independent && spec.dim() == 3 && !scaling.is_discrete();
}

template <class RowFn>
MCEstimate run_mc(std::size_t reps, std::uint64_t seed, const MCOptions& options, bool coupled, RowFn&& row) {
  if (reps < kMinReps) {
    throw MathError(ErrorKind::BadSpec, "Monte Carlo needs at least " + std::to_string(kMinReps) + " replications");
  }
  const auto moments = sum_rows(reps, resolve_workers(static_cast<int>(options.workers)), row);
  const std::int64_t S = moments.sum;
  const std::int64_t SS = moments.sum_sq;
  const double m = options.antithetic ? 2.0 : 1.0;
  const double n = static_cast<double>(reps);
  const double mean = static_cast<double>(S) / (m * n);
  const double second = static_cast<double>(SS) / (m * m * n);
  const double var = std::max(0.0, (second - mean * mean) * n / (n - 1.0));
  MCEstimate e;
  e.estimate = mean;
  e.std_error = std::sqrt(var / n);
  e.reps = reps;
  e.seed = seed;
  e.antithetic = options.antithetic;
  e.coupled = coupled;
  return e;
}

struct RowDraws {
  std::vector<double> z, x, s;
};

void draw_scales(const ScalingModel& scaling, Coupling coupling, std::uint64_t seed, std::size_t row,
                 std::vector<double>& s) {
  CounterStream rng(seed, streams::kScaling, row);
  if (coupling == Coupling::Comonotone) {
    std::fill(s.begin(), s.end(), scaling.quantile(rng.uniform()));
  } else {
    for (auto& v : s) v = scaling.quantile(rng.uniform());
  }
}

bool inside(const RectangleSpec& spec, std::span<const double> x, std::span<const double> s, double sign) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = s[i] * (sign * x[i]);
    if (!(spec.lower[i] < y && y <= spec.upper[i])) return false;
  }
  return true;
}

}  // namespace

RectangleSpec RectangleSpec::one_sided(std::vector<double> u, Coupling coupling) {
  RectangleSpec r;
  r.lower.assign(u.size(), -kInf);
  r.upper = std::move(u);
  r.coupling = coupling;
  return r;
}

RectangleSpec RectangleSpec::two_sided(std::vector<double> u, const std::vector<double>& v, Coupling coupling) {
  RectangleSpec r;
  r.upper = std::move(u);
  r.lower.resize(v.size());
  std::transform(v.begin(), v.end(), r.lower.begin(), [](double x) { return -x; });
  r.coupling = coupling;
  return r;
}

double RectangleSpec::w() const noexcept {
  double w = kInf;
  for (double x : upper) {
    if (std::isfinite(x)) w = std::min(w, std::abs(x));
  }
  for (double x : lower) {
    if (std::isfinite(x)) w = std::min(w, std::abs(x));
  }
  return w;
}

void RectangleSpec::validate(std::size_t dim) const {
  if (upper.size() != dim || lower.size() != dim) {
    throw MathError(ErrorKind::BadSpec, "threshold vectors must match the model dimension");
  }
  if (coupling == Coupling::None) throw MathError(ErrorKind::BadSpec, "rectangle needs a coupling");
  for (std::size_t i = 0; i < dim; ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || !(lower[i] < upper[i])) {
      throw MathError(ErrorKind::BadSpec, "need -v_i < u_i at coordinate " + std::to_string(i));
    }
  }
}

MCEstimate mc_rectangle_prob(const CorrelationModel& model, const ScalingModel& scaling, const RectangleSpec& spec,
                             std::size_t reps, std::uint64_t seed, const MCOptions& options) {
  spec.validate(model.dim());
  const std::size_t d = model.dim();
  return run_mc(reps, seed, options, false, [&](std::size_t r) -> std::int64_t {
    thread_local RowDraws buf;
    buf.z.resize(d);
    buf.x.resize(d);
    buf.s.resize(d);
    CounterStream g(seed, streams::kGaussian, r);
    draw_gaussian_row(model, g, buf.z, buf.x);
    draw_scales(scaling, spec.coupling, seed, r, buf.s);
    std::int64_t k = inside(spec, buf.x, buf.s, 1.0) ? 1 : 0;
    if (options.antithetic) k += inside(spec, buf.x, buf.s, -1.0) ? 1 : 0;
    return k;
  });
}

MCEstimate mc_delta(const CorrelationModel& lambda1, const CorrelationModel& lambda2, const ScalingModel& scaling,
                    const RectangleSpec& spec, std::size_t reps, std::uint64_t seed, const MCOptions& options) {
  if (lambda1.dim() != lambda2.dim()) throw MathError(ErrorKind::DimensionMismatch, "Λ1 and Λ2 differ in dimension");
  spec.validate(lambda1.dim());
  const std::size_t d = lambda1.dim();
  return run_mc(reps, seed, options, true, [&](std::size_t r) -> std::int64_t {
    thread_local RowDraws buf;
    thread_local std::vector<double> x2;
    buf.z.resize(d);
    buf.x.resize(d);
    buf.s.resize(d);
    x2.resize(d);
    CounterStream g(seed, streams::kGaussian, r);
    for (std::size_t j = 0; j < d; ++j) buf.z[j] = g.normal();
    lambda1.apply_factor(buf.z, buf.x);
    lambda2.apply_factor(buf.z, x2);
    draw_scales(scaling, spec.coupling, seed, r, buf.s);
    std::int64_t k = static_cast<std::int64_t>(inside(spec, buf.x, buf.s, 1.0)) -
                     static_cast<std::int64_t>(inside(spec, x2, buf.s, 1.0));
    if (options.antithetic) {
      k += static_cast<std::int64_t>(inside(spec, buf.x, buf.s, -1.0)) -
           static_cast<std::int64_t>(inside(spec, x2, buf.s, -1.0));
    }
    return k;
  });
}

double gaussian_rectangle(std::span<const double> lower, std::span<const double> upper, std::span<const double> R,
                          double tol) {
  const std::size_t d = lower.size();
  check_quad_dim(d);
  switch (d) {
    case 0: return 1.0;
    case 1: return interval_prob(lower[0], upper[0], 0.0, 1.0);
    case 2: return rect2(lower[0], upper[0], lower[1], upper[1], 0.0, 0.0, 1.0, 1.0, R[1], tol);
    default: return rect3(lower, upper, R, tol);
  }
}

double gaussian_rectangle_difference(std::span<const double> lower, std::span<const double> upper,
                                     std::span<const double> R1, std::span<const double> R2, double tol) {
  const std::size_t d = lower.size();
  check_quad_dim(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!(lower[i] < upper[i])) return 0.0;
  }
  if (d < 2) return 0.0;
  if (d == 2) {
    const double h[2] = {lower[0], upper[0]};
    const double k[2] = {lower[1], upper[1]};
    double acc = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double sign = (i == j) ? 1.0 : -1.0;
        acc += sign * bvn_cdf_difference(h[i], k[j], R1[1], R2[1], tol);
      }
    }
    return acc;
  }
  bool near_singular = false;
  for (int p : {1, 2, 5}) near_singular |= std::abs(R1[p]) > 0.999 || std::abs(R2[p]) > 0.999;
  if (near_singular) return gaussian_rectangle(lower, upper, R1, tol) - gaussian_rectangle(lower, upper, R2, tol);
  auto f = [&](double theta) {
    std::array<double, 9> R{};
    for (int p = 0; p < 9; ++p) R[p] = theta * R1[p] + (1.0 - theta) * R2[p];
    double acc = 0.0;
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& pr : pairs) {
      const double dr = R1[pr[0] * 3 + pr[1]] - R2[pr[0] * 3 + pr[1]];
      if (dr != 0.0) acc += dr * rect3_partial(lower, upper, R, pr[0], pr[1]);
    }
    return acc;
  };
  return adaptive_simpson(f, 0.0, 1.0, tol, kLayerDepth).value;
}

QuadValue quad_rectangle_prob(const CorrelationModel& model, const ScalingModel& scaling, const RectangleSpec& spec,
                              double tol) {
  const std::size_t d = model.dim();
  check_quad_dim(d);
  spec.validate(d);
  if (!(tol > 0.0)) throw MathError(ErrorKind::ParamOutOfRange, "tolerance must be positive");
  QuadValue q;
  if (use_gaussian_outer(scaling, spec)) {
    q = gaussian_outer3(model, scaling, spec, tol);
  } else {
    const auto R = dense_entries(model);
    const bool shared = spec.coupling == Coupling::Comonotone || d == 1;
    std::vector<double> a(d), b(d);
    q = integrate_scaling(scaling, shared ? 1 : d, d, shared, 0.5 * tol, [&](std::span<const double> s) {
      scaled_limits(spec, s, a, b);
      return gaussian_rectangle(a, b, R, tol * 1e-2);
    });
  }
  q.value = std::clamp(q.value, 0.0, 1.0);
  check_tol(q, tol);
  return q;
}

QuadValue quad_delta(const CorrelationModel& lambda1, const CorrelationModel& lambda2, const ScalingModel& scaling,
                     const RectangleSpec& spec, double tol) {
  if (lambda1.dim() != lambda2.dim()) throw MathError(ErrorKind::DimensionMismatch, "Λ1 and Λ2 differ in dimension");
  const std::size_t d = lambda1.dim();
  check_quad_dim(d);
  spec.validate(d);
  if (!(tol > 0.0)) throw MathError(ErrorKind::ParamOutOfRange, "tolerance must be positive");
  if (use_gaussian_outer(scaling, spec)) {
    const auto p1 = quad_rectangle_prob(lambda1, scaling, spec, 0.5 * tol);
    const auto p2 = quad_rectangle_prob(lambda2, scaling, spec, 0.5 * tol);
    return {p1.value - p2.value, p1.error + p2.error};
  }
  const auto R1 = dense_entries(lambda1);
  const auto R2 = dense_entries(lambda2);
  const bool shared = spec.coupling == Coupling::Comonotone || d == 1;
  std::vector<double> a(d), b(d);
  auto q = integrate_scaling(scaling, shared ? 1 : d, d, shared, 0.5 * tol, [&](std::span<const double> s) {
    scaled_limits(spec, s, a, b);
    return gaussian_rectangle_difference(a, b, R1, R2, tol * 1e-3);
  });
  check_tol(q, tol);
  return q;
}

double ks_distance(std::span<const double> sorted_sample, const std::function<double(double)>& cdf) {
  const std::size_t m = sorted_sample.size();
  if (m == 0) throw MathError(ErrorKind::BadSpec, "KS distance of an empty sample");
  double d = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double F = cdf(sorted_sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - F, F - static_cast<double>(i) / m});
  }
  return d;
}

}  // namespace berman
