#pragma once

namespace berman {

inline constexpr double kPi = 3.14159265358979323846;

double normal_pdf(double x) noexcept;
/// Standard normal CDF; Φ(±∞) is exact.
double normal_cdf(double x) noexcept;
/// Upper tail 1 - Φ(x) without cancellation.
double normal_sf(double x) noexcept;
/// Inverse of Φ on (0,1) (Wichura AS241, ~1e-16 relative accuracy).
double normal_quantile(double p) noexcept;

/// Bivariate standard normal CDF P(X ≤ h, Y ≤ k) with correlation rho, computed
/// from the Plackett correlation integral
///   Φ2 = Φ(h)Φ(k) + (1/2π) ∫_0^ρ exp(-(h²+k²-2hkr) / (2(1-r²))) (1-r²)^{-1/2} dr
/// after the substitution r = sin θ, integrated by adaptive Simpson to `tol`.
double bvn_cdf(double h, double k, double rho, double tol = 1e-13);

/// Φ2(h,k,rho1) - Φ2(h,k,rho2) as a single Plackett integral over [rho2, rho1];
/// no cancellation even when both probabilities are close to one.
double bvn_cdf_difference(double h, double k, double rho1, double rho2, double tol = 1e-15);

}  // namespace berman
