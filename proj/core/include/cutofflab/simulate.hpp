#pragma once

/*
 * Exact-in-law simulators and closed-form/quadrature marginal laws.
 *
 * Drivers D on a uniform grid: Brownian and symmetric α-stable increments,
 * fractional Brownian motion by circulant embedding, stationary Gaussian
 * processes by Gram-matrix factorization.  On top of a stable drift Λ sits
 * the stochastic convolution
 *
 *     S_t = ∫_0^t e^{−Λ(t−s)} dD_s
 *         = D_t − e^{−Λt}D_0 − ∫_0^t Λe^{−Λ(t−s)} D_s ds,
 *
 * evaluated pathwise by the integration-by-parts form for continuous drivers
 * and by increment summation for jump drivers.
 *
 * Closed-form laws: the stationary fractional Ornstein–Uhlenbeck covariance
 *
 *     R_{U^H}(0) = λ^{−2H}·Γ(2H+1)/2,
 *     R_{U^H}(t) = (Γ(2H+1)·sin(πH)/π)·∫_0^∞ cos(ωt)·ω^{1−2H}/(λ²+ω²) dω,
 *
 * the fOU marginal N(e^{−λt}x, ε²·(R(0)(1+e^{−2λt}) − 2e^{−λt}R(t))), the
 * iterated-OU limit covariance
 *
 *     Σ = R_D(0) − ∫_0^∞ R_D(s)e^{−Λᵀs}Λᵀ ds − ∫_0^∞ Λe^{−Λs}R_D(s)ᵀ ds
 *         + ∫_0^∞∫_0^∞ Λe^{−Λs}R_D(s−v)e^{−Λᵀv}Λᵀ ds dv,
 *
 * the non-homogeneous variance e^{−2λt}∫_0^t e^{2λs}τ(s)² ds → τ(∞)²/(2λ),
 * and the integrated-OU marginals (Gaussian and symmetric α-stable).
 */

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "cutofflab/metrics.hpp"
#include "cutofflab/spectral.hpp"

namespace cutofflab::simulate {

// ── types ─────────────────────────────────────────────────────────────────────

// Uniform grid t_k = k·step, k = 0,…,count−1.
struct TimeGrid {
  double step = 0.0;
  std::size_t count = 0;

  double time(std::size_t k) const { return step * static_cast<double>(k); }
  double horizon() const { return count == 0 ? 0.0 : time(count - 1); }
};

enum class DriverKind { brownian, fractional_brownian, stable, stationary_gaussian };

struct DriverSpec {
  DriverKind kind = DriverKind::brownian;
  TimeGrid grid;
  double hurst = 0.5;  // fractional_brownian, in (0,1)
  double alpha = 1.5;  // stable, in (1,2)
  std::function<double(double)> covariance;  // stationary_gaussian R_D(s)
};

// n paths of an m-component process; paths[j] holds one value row per grid
// time.  The driver kind is kept so the convolution can pick the summation
// rule for jump drivers.
struct PathEnsemble {
  std::vector<Eigen::MatrixXd> paths;  // each (grid.count × m)
  TimeGrid grid;
  std::uint64_t seed = 0;
  DriverKind kind = DriverKind::brownian;

  std::size_t count() const { return paths.size(); }
  Eigen::Index dimension() const { return paths.empty() ? 0 : paths.front().cols(); }
};

struct VarianceWithLimit {
  double value = 0.0;
  double limit = 0.0;
};

enum class IntegratedDriverKind { gaussian, stable };

enum class AveragingMode { automatic, direct, scaled };

// ── drivers and convolution ───────────────────────────────────────────────────

// Samples n independent driver paths; path j draws from the stream keyed by
// (seed, j), so the ensemble is identical for every thread count.  Throws
// InadmissibleRange for parameters outside their domain, MissingParameter
// for an absent stationary covariance, EmbeddingFailure for a kernel that is
// not PSD on the grid (tolerance −1e-10 relative).
PathEnsemble sample_driver(const DriverSpec& spec, std::size_t n, std::uint64_t seed);

// S_t = ∫_0^t e^{−Λ(t−s)}dD_s per path: integration-by-parts plus composite
// trapezoid for continuous drivers (with a step-doubling error estimate on a
// path subsample; GridTooCoarse above 1e-4 relative), increment summation
// S_{k+1} = e^{−Λh}S_k + ΔD_{k+1} for jump drivers.
PathEnsemble stochastic_convolution(const spectral::StableMatrix& a,
                                    const PathEnsemble& driver);

// ── fractional Ornstein–Uhlenbeck ─────────────────────────────────────────────

// R_{U^H}(t): analytic at t = 0, spectral quadrature (absolute tolerance
// 1e-9, else QuadratureFailure) for t > 0.
double fou_stationary_covariance(double lambda, double hurst, double t);

// Law of X^ε_t = e^{−λt}x + εS_t for the fOU family; t = ∞ (isinf) returns
// the limit N(0, ε²R(0)).
metrics::GaussianLaw fou_marginal_law(double lambda, double hurst, double epsilon,
                                      double x, double t);

// ── iterated Ornstein–Uhlenbeck ───────────────────────────────────────────────

// Limit covariance Σ of S_t for a centered stationary Gaussian driver with
// covariance function R_D (the argument is evaluated at s ≥ 0; R_D(−s) is
// taken as R_D(s)ᵀ).  Integrals are truncated at `horizon` with the tail
// magnitude ‖R_D(horizon)‖ checked against tol (SlowDecay) and folded into
// the convergence test of the panel-doubling quadrature (QuadratureFailure).
Eigen::MatrixXd iterated_ou_limit_covariance(
    const spectral::StableMatrix& a,
    const std::function<Eigen::MatrixXd(double)>& driver_covariance, double horizon,
    double tol);

// Cov(S_t) at finite t for the same driver, including the e^{−Λt} boundary
// terms; converges to iterated_ou_limit_covariance as t → ∞.
Eigen::MatrixXd iterated_ou_covariance(
    const spectral::StableMatrix& a,
    const std::function<Eigen::MatrixXd(double)>& driver_covariance, double t,
    double tol);

// ── scalar example families ───────────────────────────────────────────────────

// Non-homogeneous noise amplitude τ: value = e^{−2λt}∫_0^t e^{2λs}τ(s)² ds
// (quadrature, tolerance 1e-10) against the limit τ(∞)²/(2λ).
VarianceWithLimit inhomogeneous_variance(double lambda,
                                         const std::function<double(double)>& tau,
                                         double tau_limit, double t);

// Law of the rescaled integrated-OU fluctuation Z^ε_t = (Y^ε_t − (y+x/λ))/σ_t
// with σ_t = √t (Gaussian driver) or t^{1/α} (stable driver):
//   gaussian: N(−(x/λ)e^{−λt}/√t, (ε²/λ²)(1 − (2/λt)(1−e^{−λt}) + (1/2λt)(1−e^{−2λt})))
//   stable:   scale c(t) = (ε^α c_α/λ^α)·(1/t)∫_0^t (1−e^{−λr})^α dr,
//             location −(x/λ)e^{−λt}/t^{1/α}
// t = ∞ (isinf) returns the limit law N(0, ε²/λ²) resp. scale ε^α c_α/λ^α.
metrics::LawDescriptor integrated_ou_law(double lambda, double epsilon, double x,
                                         double y, double t, IntegratedDriverKind kind,
                                         double alpha = 1.5, double c_alpha = 1.0);

// ── averaging family ──────────────────────────────────────────────────────────

// n_replicas paths of the average (1/N)Σ_{j≤N} X^{H,j} of i.i.d. fOU paths
// started at x.  Paths are drawn exactly in law from the Gaussian bridge-like
// covariance of S^H; `direct` averages N sampled components, `scaled` uses
// (1/N)ΣS^j =law N^{−1/2}S¹, `automatic` picks direct for N ≤ 1024.
PathEnsemble average_ensemble(double lambda, double hurst, double x,
                              std::size_t n_components, const TimeGrid& grid,
                              std::size_t n_replicas, std::uint64_t seed,
                              AveragingMode mode = AveragingMode::automatic);

}  // namespace cutofflab::simulate
