#pragma once

/*
 * Spectral asymptotics of the drift.
 *
 * For a stable drift Λ (all eigenvalues of −Λ in the open left half-plane)
 * and a datum x ≠ 0, the decay of e^{−Λt}x is governed by the excited
 * eigenvalues with smallest real part λ and deepest Jordan chain ℓ:
 *
 *     (e^{λt}/t^{ℓ−1})·e^{−Λt}x − v(t;x) → 0,
 *     v(t;x) = Σ_{j=1}^{m*} e^{iθ_j t} v_j,
 *
 * with real angular velocities θ_j in conjugate pairs and fixed complex mode
 * vectors v_j.  The ω-limit set of v(·;x) is a point, a finite orbit, or the
 * closure of a torus winding.  On top of that sit the cut-off time scale
 *
 *     t*_ε = (1/λ)·ln(1/ε),
 *     t^cut_ε = t*_ε + ((ℓ−1)/λ)·ln(λ t*_ε) − (1/λ)·ln σ(t*_ε),
 *
 * and the prefactor t^{ℓ−1}e^{−λt}/(ε·σ_t) whose limit along t^cut_ε + r·w
 * is λ^{1−ℓ}e^{−λrw}.
 */

#include <vector>

#include <Eigen/Core>

#include "cutofflab/scale.hpp"

namespace cutofflab::spectral {

// ── types ─────────────────────────────────────────────────────────────────────

// Drift matrix with a certified stability margin.
struct StableMatrix {
  Eigen::MatrixXd matrix;
  double spectral_margin = 0.0;  // min over eigenvalues μ of Λ of Re(μ)

  Eigen::Index dim() const { return matrix.rows(); }
};

// Asymptotic data of e^{−Λt}x for one initial datum.
struct DominantDecomposition {
  double rate = 0.0;           // λ: smallest excited real part
  int block_size = 1;          // ℓ: deepest excited Jordan chain at rate λ
  int mode_count = 0;          // m*: number of contributing modes
  std::vector<double> angular_velocities;       // θ_j, conjugate-paired
  std::vector<Eigen::VectorXcd> mode_vectors;   // v_j
};

struct OmegaLimitSet {
  enum class Kind { point, finite_orbit, torus_closure };
  Kind kind = Kind::point;
  std::vector<Eigen::VectorXd> samples;
  double diameter = 0.0;
};

struct CutoffSchedule {
  double t_star = 0.0;
  double t_cut = 0.0;
  double epsilon = 0.0;
  double window_w = 1.0;
};

struct PrefactorPair {
  double finite_value = 0.0;
  double limit_value = 0.0;
};

// ── operations ────────────────────────────────────────────────────────────────

// Certifies the Routh–Hurwitz property of −Λ; throws NotStable when some
// eigenvalue of Λ has real part ≤ 1e-10.
StableMatrix validate_stability(const Eigen::MatrixXd& matrix);

// Extracts (λ, ℓ, m*, θ_j, v_j) for the generalized eigenspaces excited by x
// (projection norm > 1e-10·‖x‖).  Throws ZeroInitialDatum for ‖x‖ ≤ 1e-14.
DominantDecomposition dominant_decomposition(const StableMatrix& a,
                                             const Eigen::VectorXd& x);

// v(t;x) = Re Σ e^{iθ_j t} v_j; the imaginary residue (≤ 1e-10 by pairing)
// is truncated.
Eigen::VectorXd dominant_trajectory(const DominantDecomposition& dec, double t);

// ‖(e^{λt}/t^{ℓ−1})·e^{−Λt}x − v(t;x)‖, evaluated in spectrum-shifted form
// exp(−(Λ−λI)t)·x/t^{ℓ−1} so that large λt never overflows; e^{−(Λ−λI)t} is
// a Padé scaling-and-squaring matrix exponential.  Throws Overflow when the
// shifted evaluation itself leaves the representable range.
double hg_residual(const StableMatrix& a, const Eigen::VectorXd& x,
                   const DominantDecomposition& dec, double t);

// Samples the closure of {v(t;x)} and classifies it.  Finite orbits are
// detected on the unit-time sampling lattice: every nonzero θ_j/(2π) rational
// with denominator ≤ 64 (tolerance 1e-9); anything else with nonzero θ is a
// torus closure, sampled by golden-ratio phase stepping.
OmegaLimitSet omega_limit_set(const DominantDecomposition& dec, int resolution);

// t*_ε and t^cut_ε; throws InvalidEpsilon for ε ∉ (0,1) and NonPositiveScale
// when σ(t*_ε) ≤ 0.
CutoffSchedule cutoff_time_scale(double lambda, int ell, const ScaleFunction& sigma,
                                 double epsilon, double w);

// Finite prefactor t^{ℓ−1}e^{−λt}/(ε·σ_t) at t = t^cut_ε + r·w against its
// ε → 0 limit λ^{1−ℓ}e^{−λrw}; evaluated in log space.
PrefactorPair asymptotic_prefactor(const CutoffSchedule& sched, double r,
                                   double lambda, int ell, const ScaleFunction& sigma);

}  // namespace cutofflab::spectral
