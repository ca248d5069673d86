#include "berman/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "berman/error.hpp"
#include "berman/parallel.hpp"
#include "berman/rng.hpp"

namespace berman {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw MathError(ErrorKind::ParamOutOfRange, what);
}

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

void check_table(const std::vector<double>& x, const std::vector<double>& F) {
  if (x.size() < 2 || x.size() != F.size()) {
    throw MathError(ErrorKind::BadSpec, "user cdf needs at least two (x, F) knots of equal count");
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || !(F[k] >= 0.0 && F[k] <= 1.0)) {
      throw MathError(ErrorKind::BadSpec, "user cdf knots must be finite with F in [0,1]");
    }
    if (k > 0 && (!(x[k] > x[k - 1]) || F[k] < F[k - 1])) {
      throw MathError(ErrorKind::BadSpec, "user cdf knots must be strictly increasing in x and non-decreasing in F");
    }
  }
}

double table_cdf(const std::vector<double>& x, const std::vector<double>& F, double s) {
  if (s < x.front()) return 0.0;
  if (s >= x.back()) return F.back();
  const auto it = std::upper_bound(x.begin(), x.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - x.begin()) - 1;
  const double w = (s - x[k]) / (x[k + 1] - x[k]);
  return F[k] + w * (F[k + 1] - F[k]);
}

double table_quantile(const std::vector<double>& x, const std::vector<double>& F, double t) {
  if (t <= F.front()) return x.front();
  const auto it = std::lower_bound(F.begin(), F.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - F.begin());
  if (k == 0) return x.front();
  const double dF = F[k] - F[k - 1];
  if (dF <= 0.0) return x[k];
  return x[k - 1] + (t - F[k - 1]) / dF * (x[k] - x[k - 1]);
}

}  // namespace

ScalingModel ScalingModel::uniform() {
  ScalingModel m;
  m.regime_ = Regime::A;
  m.law_ = LawKind::Uniform;
  m.consts_A_ = {1.0, 1.0};
  return m;
}

ScalingModel ScalingModel::beta(double a, double b) {
  require(positive_finite(a) && positive_finite(b), "beta parameters must be positive");
  ScalingModel m;
  m.regime_ = Regime::A;
  m.law_ = LawKind::Beta;
  m.params_ = {a, b};
  // Density near 1 is (1-x)^{b-1} / B(a,b), so P(S > 1-x) ~ x^b / (b B(a,b)).
  m.consts_A_ = {1.0 / (b * boost::math::beta(a, b)), b};
  return m;
}

ScalingModel ScalingModel::two_point(double lambda, double c) {
  require(lambda >= 0.0 && lambda < 1.0, "two-point lower atom must lie in [0,1)");
  require(c > 0.0 && c <= 1.0, "two-point mass at 1 must lie in (0,1]");
  ScalingModel m;
  m.regime_ = Regime::A;
  m.law_ = LawKind::TwoPoint;
  m.params_ = {lambda, c};
  m.consts_A_ = {c, 0.0};
  if (c < 1.0) m.atoms_.push_back({lambda, 1.0 - c});
  m.atoms_.push_back({1.0, c});
  return m;
}

ScalingModel ScalingModel::degenerate() {
  ScalingModel m;
  m.regime_ = Regime::A;
  m.law_ = LawKind::Degenerate;
  m.consts_A_ = {1.0, 0.0};
  m.atoms_.push_back({1.0, 1.0});
  return m;
}

ScalingModel ScalingModel::user_cdf_A(std::vector<double> x, std::vector<double> F, TailConstantsA declared,
                                      ConstantMode mode) {
  check_table(x, F);
  if (x.front() < 0.0 || x.back() != 1.0 || F.back() != 1.0) {
    throw MathError(ErrorKind::BadSpec, "regime A user cdf must live on [0,1] and end at (1,1)");
  }
  require(positive_finite(declared.c) && declared.tau >= 0.0, "declared c must be positive and tau non-negative");
  ScalingModel m;
  m.regime_ = Regime::A;
  m.law_ = LawKind::UserCdfA;
  m.mode_ = mode;
  m.consts_A_ = declared;
  m.table_x_ = std::move(x);
  m.table_F_ = std::move(F);
  return m;
}

ScalingModel ScalingModel::exponential(double rate) {
  require(positive_finite(rate), "exponential rate must be positive");
  ScalingModel m;
  m.regime_ = Regime::B;
  m.law_ = LawKind::Exponential;
  m.params_ = {rate};
  m.consts_B_ = {1.0, 0.0, rate, 1.0};
  return m;
}

ScalingModel ScalingModel::weibull(double shape, double scale) {
  require(positive_finite(shape) && positive_finite(scale), "weibull shape and scale must be positive");
  ScalingModel m;
  m.regime_ = Regime::B;
  m.law_ = LawKind::Weibull;
  m.params_ = {shape, scale};
  m.consts_B_ = {1.0, 0.0, std::pow(scale, -shape), shape};
  return m;
}

ScalingModel ScalingModel::gamma(double shape, double rate) {
  require(positive_finite(shape) && positive_finite(rate), "gamma shape and rate must be positive");
  ScalingModel m;
  m.regime_ = Regime::B;
  m.law_ = LawKind::Gamma;
  m.params_ = {shape, rate};
  m.consts_B_ = {std::pow(rate, shape - 1.0) / boost::math::tgamma(shape), shape - 1.0, rate, 1.0};
  return m;
}

ScalingModel ScalingModel::user_cdf_B(std::vector<double> x, std::vector<double> F, TailConstantsB declared) {
  check_table(x, F);
  if (!(x.front() >= 0.0) || !(F.back() < 1.0)) {
    throw MathError(ErrorKind::BadSpec, "regime B user cdf must live on (0,∞) and leave mass for the tail");
  }
  require(positive_finite(declared.c_B) && positive_finite(declared.L) && positive_finite(declared.p) &&
              std::isfinite(declared.alpha),
          "declared c_B, L, p must be positive and alpha finite");
  ScalingModel m;
  m.regime_ = Regime::B;
  m.law_ = LawKind::UserCdfB;
  m.mode_ = ConstantMode::Bound;
  m.consts_B_ = declared;
  m.table_x_ = std::move(x);
  m.table_F_ = std::move(F);
  return m;
}

std::string ScalingModel::name() const {
  std::ostringstream out;
  switch (law_) {
    case LawKind::Uniform: return "uniform";
    case LawKind::Beta: out << "beta(" << params_[0] << "," << params_[1] << ")"; break;
    case LawKind::TwoPoint: out << "two-point(" << params_[0] << "," << params_[1] << ")"; break;
    case LawKind::Degenerate: return "degenerate";
    case LawKind::UserCdfA: return "user-cdf-A";
    case LawKind::Exponential: out << "exponential(" << params_[0] << ")"; break;
    case LawKind::Weibull: out << "weibull(" << params_[0] << "," << params_[1] << ")"; break;
    case LawKind::Gamma: out << "gamma(" << params_[0] << "," << params_[1] << ")"; break;
    case LawKind::UserCdfB: return "user-cdf-B";
  }
  return out.str();
}

const TailConstantsA& ScalingModel::constants_A() const {
  if (regime_ != Regime::A) throw MathError(ErrorKind::WrongRegime, name() + " is a regime B law");
  return consts_A_;
}

const TailConstantsB& ScalingModel::constants_B() const {
  if (regime_ != Regime::B) throw MathError(ErrorKind::WrongRegime, name() + " is a regime A law");
  return consts_B_;
}

double ScalingModel::user_sf_B(double s) const {
  const double xK = table_x_.back();
  if (s <= xK) return 1.0 - table_cdf(table_x_, table_F_, s);
  const auto& k = consts_B_;
  return (1.0 - table_F_.back()) * std::pow(s / xK, k.alpha) * std::exp(-k.L * (std::pow(s, k.p) - std::pow(xK, k.p)));
}

double ScalingModel::sf(double s) const {
  if (std::isnan(s)) throw MathError(ErrorKind::EvaluationDomain, "survival at NaN");
  switch (law_) {
    case LawKind::Uniform: return std::clamp(1.0 - s, 0.0, 1.0);
    case LawKind::Beta:
      if (s <= 0.0) return 1.0;
      if (s >= 1.0) return 0.0;
      // I_{1-s}(b, a) keeps precision as s → 1.
      return boost::math::ibeta(params_[1], params_[0], 1.0 - s);
    case LawKind::TwoPoint:
    case LawKind::Degenerate: {
      double mass = 0.0;
      for (const auto& a : atoms_) mass += a.value > s ? a.mass : 0.0;
      return mass;
    }
    case LawKind::UserCdfA: return 1.0 - table_cdf(table_x_, table_F_, s);
    case LawKind::Exponential: return s <= 0.0 ? 1.0 : std::exp(-params_[0] * s);
    case LawKind::Weibull: return s <= 0.0 ? 1.0 : std::exp(-std::pow(s / params_[1], params_[0]));
    case LawKind::Gamma: return s <= 0.0 ? 1.0 : boost::math::gamma_q(params_[0], params_[1] * s);
    case LawKind::UserCdfB: return user_sf_B(s);
  }
  return 0.0;
}

double ScalingModel::cdf(double s) const {
  switch (law_) {
    case LawKind::Beta:
      if (s <= 0.0) return 0.0;
      if (s >= 1.0) return 1.0;
      return boost::math::ibeta(params_[0], params_[1], s);
    case LawKind::Gamma: return s <= 0.0 ? 0.0 : boost::math::gamma_p(params_[0], params_[1] * s);
    case LawKind::UserCdfA: return table_cdf(table_x_, table_F_, s);
    default: return 1.0 - sf(s);
  }
}

double ScalingModel::quantile(double t) const {
  if (!(t > 0.0 && t < 1.0)) throw MathError(ErrorKind::EvaluationDomain, "quantile level must lie in (0,1)");
  switch (law_) {
    case LawKind::Uniform: return t;
    case LawKind::Beta: {
      const double a = params_[0];
      const double b = params_[1];
      if (a == 1.0) return -std::expm1(std::log1p(-t) / b);
      if (b == 1.0) return std::pow(t, 1.0 / a);
      return boost::math::ibeta_inv(a, b, t);
    }
    case LawKind::TwoPoint:
    case LawKind::Degenerate: {
      double acc = 0.0;
      for (const auto& a : atoms_) {
        acc += a.mass;
        if (t <= acc) return a.value;
      }
      return atoms_.back().value;
    }
    case LawKind::UserCdfA: return table_quantile(table_x_, table_F_, t);
    case LawKind::Exponential: return -std::log1p(-t) / params_[0];
    case LawKind::Weibull: return params_[1] * std::pow(-std::log1p(-t), 1.0 / params_[0]);
    case LawKind::Gamma: return boost::math::gamma_p_inv(params_[0], t) / params_[1];
    case LawKind::UserCdfB: {
      if (t <= table_F_.back()) return table_quantile(table_x_, table_F_, t);
      const double target = 1.0 - t;
      double lo = table_x_.back();
      double hi = std::max(2.0 * lo, 1.0);
      while (user_sf_B(hi) > target) hi *= 2.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (user_sf_B(mid) > target ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return 0.0;
}

double tail_A(const ScalingModel& model, double u) {
  if (model.regime() != Regime::A) throw MathError(ErrorKind::WrongRegime, "tail_A requires a regime A law");
  if (!(u > 1.0)) throw MathError(ErrorKind::EvaluationDomain, "tail_A requires u > 1");
  const double x = 1.0 / u;
  switch (model.law()) {
    case LawKind::Uniform: return x;
    default: return model.sf(1.0 - x);
  }
}

double tail_B(const ScalingModel& model, double u) {
  if (model.regime() != Regime::B) throw MathError(ErrorKind::WrongRegime, "tail_B requires a regime B law");
  if (!(u >= 0.0)) throw MathError(ErrorKind::EvaluationDomain, "tail_B requires u >= 0");
  return model.sf(u);
}

std::vector<double> sample_scaling(const ScalingModel& model, std::size_t reps, std::uint64_t seed,
                                   std::uint32_t stream, unsigned workers) {
  std::vector<double> out(reps);
  parallel_chunks(chunk_count(reps), resolve_workers(static_cast<int>(workers)), [&](std::size_t chunk) {
    const std::size_t r0 = chunk * kChunkRows;
    const std::size_t r1 = std::min(reps, r0 + kChunkRows);
    for (std::size_t r = r0; r < r1; ++r) {
      CounterStream rng(seed, stream, r);
      out[r] = model.quantile(rng.uniform());
    }
  });
  return out;
}

TailDiagnostic tail_constant_estimate(const ScalingModel& model) {
  TailDiagnostic d;
  d.regime = model.regime();
  if (model.regime() == Regime::A) {
    const auto k = model.constants_A();
    d.declared = {k.c, k.tau};
    const double us[] = {1e2, 1e3, 1e4};
    double prev = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double P = tail_A(model, us[i]);
      if (!(P > 0.0)) throw MathError(ErrorKind::EvaluationDomain, "tail vanishes at u = " + std::to_string(us[i]));
      // τ from the previous decade; the first point reuses the declared τ.
      const double tau = i == 0 ? k.tau : std::log(prev / P) / std::log(us[i] / us[i - 1]);
      const double c = std::pow(us[i], tau) * P;
      d.points.push_back({us[i], us[i], {c, tau}});
      prev = P;
    }
  } else {
    const auto k = model.constants_B();
    d.declared = {k.c_B, k.alpha, k.L, k.p};
    for (double level : {1e-4, 1e-6}) {
      const double x = model.quantile(1.0 - level);
      const double P = tail_B(model, x);
      if (!(P > 0.0) || !(x > 1.0)) {
        throw MathError(ErrorKind::EvaluationDomain, "tail point unusable for the ratio estimates");
      }
      const double lx = std::log(x);
      const double xp = std::pow(x, k.p);
      // Each constant solved from ln P = ln c_B + α ln x - L x^p with the others declared.
      const double c = P * std::pow(x, -k.alpha) * std::exp(k.L * xp);
      const double alpha = (std::log(P / k.c_B) + k.L * xp) / lx;
      const double resid = std::log(k.c_B) + k.alpha * lx - std::log(P);
      const double L = resid / xp;
      const double p = resid > 0.0 ? std::log(resid / k.L) / lx : std::numeric_limits<double>::quiet_NaN();
      d.points.push_back({level, x, {c, alpha, L, p}});
    }
  }
  d.final_estimates = d.points.back().estimates;
  for (std::size_t i = 0; i < d.declared.size(); ++i) {
    const double scale = std::max(1.0, std::abs(d.declared[i]));
    const double dev = std::abs(d.final_estimates[i] - d.declared[i]) / scale;
    d.max_relative_deviation = std::isnan(dev) ? std::numeric_limits<double>::infinity()
                                               : std::max(d.max_relative_deviation, dev);
  }
  d.consistent = d.max_relative_deviation <= 0.05;
  return d;
}

}  // namespace berman
