#pragma once

/*
 * Catalog of linear process families with small-noise cut-off.
 *
 * Every family fixes the law of X^ε_t(x) = e^{−Λt}x + εS_t together with the
 * normalizing scale σ_t and the limit law Z of S_t/σ_t:
 *
 *   fou_1d                   scalar λ, Hurst H: S_t = U_t − e^{−λt}U_0 with U
 *                            the stationary fractional OU; σ≡1, Z = N(0, R_U(0)).
 *   multivariate_gaussian_linear
 *                            stable Λ, noise covariance C: S_t the Brownian
 *                            convolution, Cov(S_t) = Σ_t solving the Lyapunov
 *                            equation ΛΣ_t + Σ_tΛᵀ = C − e^{−Λt}Ce^{−Λᵀt};
 *                            σ≡1, Z = N(0, Σ_∞).
 *   averaging                empirical mean of N i.i.d. fOU copies: the fOU
 *                            equation with ε_N = 1/√N; σ≡1, Z = N(0, R_U(0)).
 *   generalized_ou           stationary Gaussian U with covariance R_U:
 *                            S_t = U_t − e^{−Λt}U_0; σ≡1, Z =Law U_0.
 *   iterated_ou              OU driven by a stationary Gaussian process D with
 *                            covariance R_D; σ≡1, Z = N(0, Σ) with Σ the
 *                            iterated-OU limit covariance.
 *   inhomogeneous            scalar Brownian noise of amplitude τ(t) → τ∞ > 0:
 *                            σ≡1, Z = N(0, τ∞²/(2λ)).
 *   integrated_ou_gaussian   integrated OU position Y_t, S_t = Y_t − (y + x/λ):
 *                            σ_t = √t, Z = N(0, 1/λ²) after 1/ε normalization.
 *   integrated_ou_stable     the same under symmetric α-stable noise:
 *                            σ_t = t^{1/α}, Z symmetric α-stable, scale c_α/λ^α.
 *
 * marginal_law describes X^ε_t(x)/(ε·σ_t): every family has an exact marginal
 * (Gaussian, or symmetric α-stable for the stable one); scenarios flagged
 * monte_carlo return an empirical law sampled through the simulators instead.
 */

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "cutofflab/metrics.hpp"
#include "cutofflab/scale.hpp"
#include "cutofflab/spectral.hpp"

namespace cutofflab::scenarios {

// ── types ─────────────────────────────────────────────────────────────────────

enum class Family {
  fou_1d,
  multivariate_gaussian_linear,
  averaging,
  generalized_ou,
  iterated_ou,
  inhomogeneous,
  integrated_ou_gaussian,
  integrated_ou_stable,
};

// Canonical lowercase name of a family, and its inverse (nullopt if unknown).
const char* family_name(Family family);
std::optional<Family> family_from_name(std::string_view name);

struct MetricChoice {
  enum class Kind { total_variation, wasserstein };
  Kind kind = Kind::total_variation;
  double p = 1.0;  // Wasserstein order, ≥ 1
};

struct Evaluation {
  enum class Kind { exact, monte_carlo };
  Kind kind = Kind::exact;
  std::size_t sample_count = 100000;
  std::uint64_t seed = 0xC0FFEE;
};

// Optional-heavy parameter bag; build_scenario checks presence and ranges per
// family.  Scalar families accept either a 1×1 drift or the lambda shorthand.
struct ScenarioParams {
  std::optional<Eigen::MatrixXd> drift;  // Λ; exclusive with lambda
  std::optional<double> lambda;          // shorthand for a 1×1 drift
  std::optional<Eigen::VectorXd> x;      // initial datum; exclusive with x_scalar
  std::optional<double> x_scalar;
  std::optional<double> epsilon;                    // in (0,1); averaging derives it
  std::optional<std::size_t> n_components;          // averaging N ≥ 2
  std::optional<double> hurst;                      // in (0,1)
  std::optional<double> alpha;                      // stable index, in (1,2)
  std::optional<double> c_alpha;                    // stable scale multiplier > 0
  std::optional<double> y;                          // integrated start, default 0
  std::optional<Eigen::MatrixXd> noise_covariance;  // multivariate C, default I
  std::function<double(double)> tau;                // inhomogeneous amplitude
  std::optional<double> tau_limit;                  // τ∞ > 0
  // Stationary driver covariance R(s) for s ≥ 0, with R(−s) = R(s)ᵀ implied:
  // R_U for generalized_ou, R_D for iterated_ou.
  std::function<Eigen::MatrixXd(double)> driver_covariance;
  std::optional<double> driver_horizon;  // truncation horizon of the Σ integrals
  std::optional<MetricChoice> metric;
  std::optional<Evaluation> evaluation;
};

// A validated, immutable family instance.  All fields are fixed at build time;
// the marginal and limit laws are recomputed on demand (pure functions).
struct Scenario {
  Family family = Family::fou_1d;
  spectral::StableMatrix drift;  // Λ, 1×1 for the scalar families
  Eigen::VectorXd x;             // ≠ 0
  double epsilon = 0.0;          // averaging: 1/√N
  std::size_t n_components = 0;  // averaging N, 0 elsewhere
  double hurst = 0.5;
  double alpha = 1.5;
  double c_alpha = 1.0;
  double y = 0.0;
  Eigen::MatrixXd noise_covariance;
  std::function<double(double)> tau;
  double tau_limit = 0.0;
  std::function<Eigen::MatrixXd(double)> driver_covariance;
  double driver_horizon = 0.0;
  ScaleFunction scale = ScaleFunction::one();
  MetricChoice metric;
  Evaluation evaluation;

  Eigen::Index dimension() const { return drift.dim(); }
};

// ── driver covariance helpers ─────────────────────────────────────────────────

// R(s) = e^{−Θs}·Σ of a stationary OU driver with drift Θ and stationary
// covariance Σ (symmetric PSD, matching Θ's size, else InadmissibleRange).
std::function<Eigen::MatrixXd(double)> ou_driver_covariance(
    const spectral::StableMatrix& theta, const Eigen::MatrixXd& stationary_covariance);

// 1×1 covariance of the stationary fractional OU with the given rate and Hurst
// exponent.
std::function<Eigen::MatrixXd(double)> fou_driver_covariance(double lambda,
                                                             double hurst);

// 1×1 kernel variance·e^{−rate·s}; variance > 0 and rate > 0.
std::function<Eigen::MatrixXd(double)> exponential_driver_covariance(double variance,
                                                                     double rate);

// ── operations ────────────────────────────────────────────────────────────────

// Validates the parameter bag for the family and returns the scenario with its
// prescribed scale function (σ≡1 except √t for the integrated Gaussian family
// and t^{1/α} for the integrated stable one) and defaults (metric: total
// variation, except Wasserstein-1 for averaging; evaluation: exact, except
// monte_carlo for averaging).  Throws MissingParameter for an absent required
// field and InadmissibleRange for out-of-range values or inconsistent choices
// (total variation with empirical evaluation, Wasserstein order p ≥ α with a
// stable driver, zero initial datum); NotStable propagates from the drift.
Scenario build_scenario(Family family, const ScenarioParams& params);

// Limit law Z of S_t/σ_t.  Propagates SlowDecay and QuadratureFailure from the
// iterated-OU covariance integrals.
metrics::LawDescriptor scenario_limit_law(const Scenario& s);

// Law of X^ε_t(x)/(ε·σ_t) at time t ≥ 0 (t = ∞ returns the limit law): the
// exact law for scenarios evaluated exactly, an empirical law of
// evaluation.sample_count draws (seeded by evaluation.seed) for monte_carlo
// scenarios.  The integrated families require t > 0 since σ_0 = 0.
metrics::LawDescriptor marginal_law(const Scenario& s, double t);

// The exact marginal regardless of the scenario's evaluation mode; throws
// NoExactLaw for a family without a closed-form marginal (none in the
// catalog).
metrics::LawDescriptor exact_marginal_law(const Scenario& s, double t);

// n ≥ 2 independent draws (one row each) of X^ε_t(x)/(ε·σ_t).  Families with
// path machinery draw through it (fOU and averaging through the Gram-matrix
// bridge sampler, scalar generalized and iterated OU through the stationary
// driver sampler and the stochastic convolution); the rest draw from the exact
// marginal.  Deterministic in (s, t, n, seed) for every thread count.
Eigen::MatrixXd sample_normalized(const Scenario& s, double t, std::size_t n,
                                  std::uint64_t seed);

}  // namespace cutofflab::scenarios
