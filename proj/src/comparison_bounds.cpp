#include "berman/comparison_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "berman/error.hpp"
#include "berman/format.hpp"
#include "berman/normal.hpp"

namespace berman {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_w(double w) {
  if (!(w > 0.0) || std::isnan(w)) throw MathError(ErrorKind::ParamOutOfRange, "w must be positive");
}

void require_epsilon(double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw MathError(ErrorKind::ParamOutOfRange, "epsilon must be >= 0");
}

template <class G>
BoundReport accumulate(BoundReport r, const PairTerms& terms, double prefactor, G&& per_rho) {
  r.contributions.reserve(terms.pairs.size());
  double total = 0.0;
  for (const auto& p : terms.pairs) {
    const double c = prefactor * p.A * per_rho(p.rho);
    r.contributions.push_back({p.i, p.j, p.A, p.rho, c});
    total += c;
  }
  r.value = total;
  return r;
}

BoundReport base(BoundFamily family, const char* regime, Coupling coupling, double w) {
  BoundReport r;
  r.family = family;
  r.regime = regime;
  r.coupling = coupling;
  r.w = w;
  r.constants = {kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
  return r;
}

BoundReport theorem_base(BoundFamily family, const char* regime, Coupling coupling, double w, double eps,
                         double w_min, const BoundConstants& k) {
  require_w(w);
  require_epsilon(eps);
  BoundReport r = base(family, regime, coupling, w);
  r.epsilon = eps;
  r.w_min = w_min;
  r.advisory = w < w_min;
  r.constants = k;
  return r;
}

}  // namespace

double safe_asin(double x) noexcept { return std::asin(std::clamp(x, -1.0, 1.0)); }

PairTerms pairwise_terms(const CorrelationModel& lambda1, const CorrelationModel& lambda2) {
  if (lambda1.dim() != lambda2.dim()) {
    std::ostringstream msg;
    msg << "dimensions " << lambda1.dim() << " and " << lambda2.dim() << " differ";
    throw MathError(ErrorKind::DimensionMismatch, msg.str());
  }
  PairTerms t;
  t.dim = lambda1.dim();
  const bool banded = lambda1.kind() != CorrelationKind::Explicit && lambda2.kind() != CorrelationKind::Explicit;
  const std::size_t reach = banded ? std::max(lambda1.kernel().size(), lambda2.kernel().size()) : t.dim;
  for (std::size_t i = 0; i < t.dim; ++i) {
    const std::size_t j_end = std::min(t.dim, i + reach);
    for (std::size_t j = i + 1; j < j_end; ++j) {
      const double l1 = lambda1.entry(i, j);
      const double l2 = lambda2.entry(i, j);
      const double A = std::abs(safe_asin(l1) - safe_asin(l2));
      if (A == 0.0) continue;
      t.pairs.push_back({i, j, A, std::min(1.0, std::max(std::abs(l1), std::abs(l2)))});
    }
  }
  return t;
}

std::string_view to_string(Coupling c) {
  switch (c) {
    case Coupling::None: return "none";
    case Coupling::Independent: return "independent";
    case Coupling::Comonotone: return "comonotone";
  }
  return "?";
}

std::string_view to_string(BoundFamily f) {
  switch (f) {
    case BoundFamily::Classical: return "classical";
    case BoundFamily::UniformScaling: return "uniform-scaling";
    case BoundFamily::ExponentialScaling: return "exponential-scaling";
    case BoundFamily::AIndependent: return "A-independent";
    case BoundFamily::AComonotone: return "A-comonotone";
    case BoundFamily::BIndependent: return "B-independent";
    case BoundFamily::BComonotone: return "B-comonotone";
  }
  return "?";
}

BoundConstants bound_constants(const TailConstantsA& k) {
  const double g = boost::math::tgamma(k.tau + 1.0);
  return {2.0 / kPi * k.c * k.c * g * g, std::pow(2.0, 1.0 - k.tau) / kPi * k.c * g, kNaN, kNaN, kNaN, kNaN, kNaN};
}

BoundConstants bound_constants(const TailConstantsB& k) {
  const double p = k.p;
  const double Lp = k.L * p;
  const double T = std::pow(k.L, 2.0 / (p + 2.0)) * std::pow(p, -p / (p + 2.0)) + 0.5 * std::pow(Lp, 2.0 / (p + 2.0));
  const double K_B = 4.0 * k.c_B * k.c_B * std::pow(Lp, 2.0 * (1.0 - k.alpha) / (p + 2.0)) / (p + 2.0);
  const double K_B_star = std::pow(2.0, (3.0 + 2.0 * p + k.alpha) / (2.0 + p)) / std::sqrt(kPi) * k.c_B *
                          std::pow(Lp, (1.0 - k.alpha) / (p + 2.0)) / std::sqrt(p + 2.0);
  const double Q = std::pow(Lp, 1.0 / (2.0 + p));
  const double varpi = k.c_B / std::sqrt(2.0 + p) * std::pow(Q, -k.alpha);
  return {kNaN, kNaN, K_B, K_B_star, T, Q, varpi};
}

BoundReport berman_bound_classical(const PairTerms& terms, double w) {
  require_w(w);
  return accumulate(base(BoundFamily::Classical, "none", Coupling::None, w), terms, 2.0 / kPi,
                    [w](double rho) { return std::exp(-w * w / (1.0 + rho)); });
}

BoundReport bound_uniform_scaling(const PairTerms& terms, double w) {
  require_w(w);
  return accumulate(base(BoundFamily::UniformScaling, "A", Coupling::Independent, w), terms, 2.0 / kPi,
                    [w](double rho) { return std::exp(-w * w / (1.0 + rho)); });
}

BoundReport bound_exponential_scaling(const PairTerms& terms, double w, double a, double b) {
  require_w(w);
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) {
    throw MathError(ErrorKind::ParamOutOfRange, "exponential-scaling bound needs a, b in (0,1)");
  }
  const double k = 1.5 * (std::cbrt(a * a) + std::cbrt(b * b)) * std::cbrt(w * w);
  return accumulate(base(BoundFamily::ExponentialScaling, "B", Coupling::Independent, w), terms,
                    2.0 / (kPi * (1.0 - a) * (1.0 - b)), [k](double rho) { return std::exp(-k / std::cbrt(1.0 + rho)); });
}

BoundReport bound_A_independent(const PairTerms& terms, double w, const ScalingModel& model, double epsilon,
                                double w_min) {
  const auto tc = model.constants_A();
  const auto k = bound_constants(tc);
  auto r = theorem_base(BoundFamily::AIndependent, "A", Coupling::Independent, w, epsilon, w_min, k);
  return accumulate(std::move(r), terms, (k.K_A + epsilon) * std::pow(w, -4.0 * tc.tau), [&](double rho) {
    return std::pow(1.0 + rho, 2.0 * tc.tau) * std::exp(-w * w / (1.0 + rho));
  });
}

BoundReport bound_A_comonotone(const PairTerms& terms, double w, const ScalingModel& model, double epsilon,
                               double w_min) {
  const auto tc = model.constants_A();
  const auto k = bound_constants(tc);
  auto r = theorem_base(BoundFamily::AComonotone, "A", Coupling::Comonotone, w, epsilon, w_min, k);
  return accumulate(std::move(r), terms, (k.K_A_star + epsilon) * std::pow(w, -2.0 * tc.tau), [&](double rho) {
    return std::pow(1.0 + rho, tc.tau) * std::exp(-w * w / (1.0 + rho));
  });
}

BoundReport bound_B_independent(const PairTerms& terms, double w, const ScalingModel& model, double epsilon,
                                double w_min) {
  const auto tc = model.constants_B();
  const auto k = bound_constants(tc);
  const double p = tc.p;
  auto r = theorem_base(BoundFamily::BIndependent, "B", Coupling::Independent, w, epsilon, w_min, k);
  const double wpow = std::pow(w, 2.0 * p / (2.0 + p));
  return accumulate(std::move(r), terms, (k.K_B + epsilon) * std::pow(w, (4.0 * tc.alpha + 2.0 * p) / (2.0 + p)),
                    [&](double rho) {
                      return std::pow(1.0 + rho, (-2.0 * tc.alpha - p) / (p + 2.0)) *
                             std::exp(-2.0 * std::pow(1.0 + rho, -p / (2.0 + p)) * k.T * wpow);
                    });
}

BoundReport bound_B_comonotone(const PairTerms& terms, double w, const ScalingModel& model, double epsilon,
                               double w_min) {
  const auto tc = model.constants_B();
  const auto k = bound_constants(tc);
  const double p = tc.p;
  auto r = theorem_base(BoundFamily::BComonotone, "B", Coupling::Comonotone, w, epsilon, w_min, k);
  const double wpow = std::pow(w, 2.0 * p / (2.0 + p));
  return accumulate(std::move(r), terms, (k.K_B_star + epsilon) * std::pow(w, (2.0 * tc.alpha + p) / (2.0 + p)),
                    [&](double rho) {
                      return std::pow(1.0 + rho, (-2.0 * tc.alpha - p) / (2.0 * (p + 2.0))) *
                             std::exp(-std::pow(2.0 / (1.0 + rho), p / (2.0 + p)) * k.T * wpow);
                    });
}

BoundReport theorem_bound(const PairTerms& terms, double w, const ScalingModel& model, Coupling coupling,
                          double epsilon, double w_min) {
  if (coupling == Coupling::None) throw MathError(ErrorKind::BadSpec, "theorem bounds need a coupling");
  const bool indep = coupling == Coupling::Independent;
  if (model.regime() == Regime::A) {
    return indep ? bound_A_independent(terms, w, model, epsilon, w_min)
                 : bound_A_comonotone(terms, w, model, epsilon, w_min);
  }
  return indep ? bound_B_independent(terms, w, model, epsilon, w_min)
               : bound_B_comonotone(terms, w, model, epsilon, w_min);
}

CorollaryReport corollary_identity_bound(const CorrelationModel& lambda1, double u, const ScalingModel& model,
                                         Coupling coupling, double epsilon, double w_min) {
  std::vector<std::vector<double>> eye(lambda1.dim(), std::vector<double>(lambda1.dim(), 0.0));
  for (std::size_t i = 0; i < eye.size(); ++i) eye[i][i] = 1.0;
  const auto terms = pairwise_terms(lambda1, validate_correlation(eye));

  CorollaryReport out;
  out.theorem = theorem_bound(terms, u, model, coupling, epsilon, w_min);
  const bool indep = coupling == Coupling::Independent;
  const auto& k = out.theorem.constants;

  double exponent = 0.0;
  std::function<double(double)> tail;
  if (model.regime() == Regime::A) {
    const double tau = model.constants_A().tau;
    out.Q = kPi / 2.0 * ((indep ? k.K_A : k.K_A_star) + epsilon);
    exponent = indep ? -4.0 * tau : -2.0 * tau;
    tail = [u](double rho) { return std::exp(-u * u / (1.0 + rho)); };
  } else {
    const auto tc = model.constants_B();
    const double p = tc.p;
    const double wpow = std::pow(u, 2.0 * p / (2.0 + p));
    out.Q = kPi / 2.0 * ((indep ? k.K_B : k.K_B_star) + epsilon);
    exponent = indep ? (4.0 * tc.alpha + 2.0 * p) / (2.0 + p) : (2.0 * tc.alpha + p) / (2.0 + p);
    if (indep) {
      tail = [=](double rho) { return std::exp(-2.0 * std::pow(1.0 + rho, -p / (2.0 + p)) * k.T * wpow); };
    } else {
      tail = [=](double rho) { return std::exp(-std::pow(2.0 / (1.0 + rho), p / (2.0 + p)) * k.T * wpow); };
    }
  }
  double sum = 0.0;
  for (const auto& p : terms.pairs) sum += p.rho * tail(p.rho);
  out.corollary = out.Q * std::pow(u, exponent) * sum;
  return out;
}

std::string bound_pairs_csv(const BoundReport& report) {
  std::string out = "i,j,A,rho,contribution\n";
  for (const auto& c : report.contributions) {
    out += std::to_string(c.i) + "," + std::to_string(c.j) + "," + format_double(c.A) + "," + format_double(c.rho) +
           "," + format_double(c.contribution) + "\n";
  }
  return out;
}

nlohmann::json bound_summary_json(const BoundReport& report) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isnan(x)) return nullptr;
    return x;
  };
  nlohmann::json j;
  j["family"] = std::string(to_string(report.family));
  j["regime"] = report.regime;
  j["coupling"] = std::string(to_string(report.coupling));
  j["w"] = report.w;
  j["epsilon"] = report.epsilon;
  j["w_min"] = report.w_min;
  j["advisory"] = report.advisory;
  j["value"] = report.value;
  j["pairs"] = report.contributions.size();
  const auto& k = report.constants;
  j["constants"] = {{"K_A", num(k.K_A)}, {"K_A_star", num(k.K_A_star)}, {"K_B", num(k.K_B)},
                    {"K_B_star", num(k.K_B_star)}, {"T", num(k.T)}, {"Q", num(k.Q)}, {"varpi_B", num(k.varpi_B)}};
  return j;
}

}  // namespace berman
