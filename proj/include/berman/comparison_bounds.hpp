#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "berman/gaussian_core.hpp"
#include "berman/scaling.hpp"

namespace berman {

inline constexpr double kDefaultEpsilon = 0.1;
inline constexpr double kDefaultWMin = 2.5;

struct PairTerm {
  std::size_t i = 0;
  std::size_t j = 0;
  double A = 0.0;    // |asin λ¹_ij - asin λ²_ij|
  double rho = 0.0;  // max(|λ¹_ij|, |λ²_ij|)
};

/// Pairs with A_ij = 0 contribute nothing to any bound and are not stored.
struct PairTerms {
  std::size_t dim = 0;
  std::vector<PairTerm> pairs;
};

/// asin with the argument clamped to [-1,1], so ±1 map to ±π/2 exactly.
double safe_asin(double x) noexcept;

PairTerms pairwise_terms(const CorrelationModel& lambda1, const CorrelationModel& lambda2);

enum class Coupling { None, Independent, Comonotone };

enum class BoundFamily {
  Classical,
  UniformScaling,
  ExponentialScaling,
  AIndependent,
  AComonotone,
  BIndependent,
  BComonotone,
};

std::string_view to_string(Coupling c);
std::string_view to_string(BoundFamily f);

/// Entries that do not apply to the regime are NaN.
struct BoundConstants {
  double K_A;
  double K_A_star;
  double K_B;
  double K_B_star;
  double T;
  double Q;
  double varpi_B;
};

BoundConstants bound_constants(const TailConstantsA& k);
BoundConstants bound_constants(const TailConstantsB& k);

struct PairContribution {
  std::size_t i;
  std::size_t j;
  double A;
  double rho;
  double contribution;
};

struct BoundReport {
  BoundFamily family = BoundFamily::Classical;
  std::string regime = "none";  // "none", "A" or "B"
  Coupling coupling = Coupling::None;
  double w = 0.0;
  double epsilon = 0.0;
  double w_min = 0.0;
  /// Theorem bounds evaluated below w_min are advisory only.
  bool advisory = false;
  BoundConstants constants{};
  std::vector<PairContribution> contributions;
  double value = 0.0;
};

BoundReport berman_bound_classical(const PairTerms& terms, double w);
BoundReport bound_uniform_scaling(const PairTerms& terms, double w);
BoundReport bound_exponential_scaling(const PairTerms& terms, double w, double a, double b);
BoundReport bound_A_independent(const PairTerms& terms, double w, const ScalingModel& model,
                                double epsilon = kDefaultEpsilon, double w_min = kDefaultWMin);
BoundReport bound_A_comonotone(const PairTerms& terms, double w, const ScalingModel& model,
                               double epsilon = kDefaultEpsilon, double w_min = kDefaultWMin);
BoundReport bound_B_independent(const PairTerms& terms, double w, const ScalingModel& model,
                                double epsilon = kDefaultEpsilon, double w_min = kDefaultWMin);
BoundReport bound_B_comonotone(const PairTerms& terms, double w, const ScalingModel& model,
                               double epsilon = kDefaultEpsilon, double w_min = kDefaultWMin);

/// Theorem bound for the model's regime and the given coupling.
BoundReport theorem_bound(const PairTerms& terms, double w, const ScalingModel& model, Coupling coupling,
                          double epsilon = kDefaultEpsilon, double w_min = kDefaultWMin);

struct CorollaryReport {
  BoundReport theorem;      // exact theorem bound against the identity
  double Q = 0.0;           // (π/2)·(theorem constant + ε)
  double corollary = 0.0;   // Q·u^{exponent}·Σ|λ_ij|·(theorem exponential factor at ρ = |λ_ij|)
};

/// Comparison against the identity matrix with one-sided thresholds u·1. The
/// corollary shape replaces asin|λ| by (π/2)|λ| and drops the (1+ρ) power
/// prefactors.
CorollaryReport corollary_identity_bound(const CorrelationModel& lambda1, double u, const ScalingModel& model,
                                         Coupling coupling, double epsilon = kDefaultEpsilon,
                                         double w_min = kDefaultWMin);

/// Header "i,j,A,rho,contribution" plus one row per stored pair.
std::string bound_pairs_csv(const BoundReport& report);
nlohmann::json bound_summary_json(const BoundReport& report);

}  // namespace berman
