#pragma once

/*
 * Probability distances and limiting window profiles.
 *
 * Total variation between Gaussians:
 *   equal covariance C:   d_TV = 2Φ(‖C^{−1/2}(m₁−m₂)‖/2) − 1
 *   general univariate:   ½∫|f₁−f₂|, evaluated in closed form at the two
 *                         crossing points of the densities.
 *
 * Wasserstein-p:
 *   shift against itself:    W_p(v + Z, Z) = ‖v‖ for any law Z with a finite
 *                            p-th moment, every p ≥ 1.
 *   empirical univariate:    optimal coupling sorts both samples.
 *   empirical multivariate:  exact minimum-cost assignment.
 *
 * Window profiles, evaluated at time t^cut + r·w:
 *   TV (univariate):  2Φ(e^{−λrw}|x| / (2√R₀)) − 1
 *   TV (general):     d_TV(λ^{1−ℓ}e^{−λrw}·v + Z, Z)
 *   W_p:              λ^{1−ℓ}e^{−λrw}·‖v‖, independent of p.
 *
 * Densities of symmetric α-stable laws (CF exp(izδ − c|z|^α)) are recovered
 * by discrete Fourier inversion on uniform symmetric grids.
 */

#include <variant>

#include <Eigen/Core>

namespace cutofflab::metrics {

// ── Law carriers ─────────────────────────────────────────────────────────────

struct GaussianLaw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // symmetric PSD

  Eigen::Index dim() const { return mean.size(); }
};

// Symmetric α-stable law, CF ψ(z) = exp(i·location·z − scale_c·|z|^α).
struct StableLawDescriptor {
  double alpha = 1.5;    // in (1, 2]; 2 degenerates to N(location, 2·scale_c)
  double scale_c = 1.0;  // > 0
  double location = 0.0;
};

// One sample per row; at least two samples.
struct EmpiricalLaw {
  Eigen::MatrixXd samples;

  Eigen::Index count() const { return samples.rows(); }
  Eigen::Index dim() const { return samples.cols(); }
};

using LawDescriptor = std::variant<GaussianLaw, StableLawDescriptor, EmpiricalLaw>;

// Density tabulated on a uniform grid of abscissae.
struct DensityGrid {
  Eigen::VectorXd x;
  Eigen::VectorXd f;
};

// Distance plus the normalization defect bounding the grid-truncation error.
struct TvDensityEstimate {
  double value = 0.0;
  double tail_mass = 0.0;
};

// ── Total variation ──────────────────────────────────────────────────────────

// Exact total variation between two Gaussian laws.  Supported: any pair of
// univariate laws (including degenerate point masses), and multivariate
// pairs with equal covariance (possibly singular).  Throws UnsupportedCase
// for multivariate pairs with distinct covariances.
double tv_gaussian(const GaussianLaw& g1, const GaussianLaw& g2);

// Total variation ½∫|f₁−f₂| by trapezoidal rule on a shared grid.  Each
// density must be nonnegative and integrate to 1 within 1e-6; the reported
// tail mass bounds the truncation error.  Throws GridMismatch and
// NotNormalized.
TvDensityEstimate tv_from_densities(const DensityGrid& f1, const DensityGrid& f2);

// Density of a stable law by Fourier inversion of its characteristic
// function on a uniform grid symmetric about 0 (odd point count).  The
// implied frequency cutoff is π/h for grid spacing h; the CF must have
// decayed below 1e-12 there, otherwise NyquistViolation.  Negative lobes
// are clipped (NegativeMass above 1e-4) and the result is renormalized
// (NotNormalized when the correction exceeds 1e-6).
DensityGrid density_from_cf(const StableLawDescriptor& law,
                            const Eigen::VectorXd& grid);

// ── Wasserstein ──────────────────────────────────────────────────────────────

// W_p(shift + Z, Z) = ‖shift‖ for every law Z with finite p-th moment.
// Throws MomentViolation when Z is stable with p ≥ α.
double wp_exact(const LawDescriptor& law, const Eigen::VectorXd& shift, double p);

// Empirical W_p between two equally sized samples (one row per draw).
// Univariate samples use the sorted (monotone) coupling; multivariate
// samples use the exact minimum-cost assignment, except that pairs related
// by one constant shift short-circuit to that shift's cost.  Throws
// UnequalCounts and, for multivariate counts above 2048, TooLargeForExact.
double wp_empirical(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2, double p);

// W_p between two univariate Gaussians via the monotone coupling,
// (E|δ + (s₂−s₁)G|^p)^{1/p} with δ = m₂−m₁: closed forms for p ∈ {1,2,3},
// tanh-sinh quadrature otherwise.
double wp_gaussian_univariate(double m1, double s1, double m2, double s2, double p);

// ── Window profiles ──────────────────────────────────────────────────────────

// Univariate total-variation profile 2Φ(e^{−λrw}|x|/(2√R₀)) − 1.
double profile_tv(double lambda, double w, double x, double r0, double r);

// General total-variation profile d_TV(λ^{1−ℓ}e^{−λrw}v + Z, Z) for a
// Gaussian limit law Z with nonsingular covariance (else SingularLimitLaw).
double profile_tv(double lambda, int ell, double w, const Eigen::VectorXd& v,
                  const GaussianLaw& z, double r);

// Wasserstein profile λ^{1−ℓ}e^{−λrw}‖v‖; the same for every p ≥ 1.
double profile_wp(double lambda, int ell, double w, const Eigen::VectorXd& v,
                  double r, double p);

// ── Shared special functions ─────────────────────────────────────────────────

// Standard normal CDF, accurate to full double precision via erfc.
double normal_cdf(double x);

// E|G|^p for standard normal G: 2^{p/2}·Γ((p+1)/2)/√π.
double normal_absolute_moment(double p);

}  // namespace cutofflab::metrics
