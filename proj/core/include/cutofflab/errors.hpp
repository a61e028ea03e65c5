#pragma once

/*
 * Error taxonomy for the cutofflab library.
 *
 * Every throwing code path uses one of the types below so callers can react to
 * the precise failure (a bad drift matrix is recoverable by fixing the input,
 * a failed quadrature is not).  All types derive from Error, itself a
 * std::runtime_error, so "catch (const Error&)" at a process boundary maps the
 * whole family to one exit path.  Messages follow the "function: detail"
 * convention.
 */

#include <stdexcept>
#include <string>

namespace cutofflab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ── Spectral analysis ─────────────────────────────────────────────────────────

// Some eigenvalue of −Λ has nonnegative real part: e^{−Λt} does not contract.
struct NotStable : Error { using Error::Error; };

// Initial datum below the excitation threshold; no dominant mode exists.
struct ZeroInitialDatum : Error { using Error::Error; };

// A requested evaluation left the representable floating-point range.
struct Overflow : Error { using Error::Error; };

// ε outside (0,1); the cut-off schedule is undefined.
struct InvalidEpsilon : Error { using Error::Error; };

// σ(t*) ≤ 0; the schedule's scale correction ln σ(t*) is undefined.
struct NonPositiveScale : Error { using Error::Error; };

// ── Distances ─────────────────────────────────────────────────────────────────

// A case the library deliberately does not compute (e.g. multivariate TV with
// unequal covariances).
struct UnsupportedCase : Error { using Error::Error; };

// Two grid-sampled densities live on different grids.
struct GridMismatch : Error { using Error::Error; };

// A grid density does not integrate to 1 within tolerance (or is negative).
struct NotNormalized : Error { using Error::Error; };

// Grid spacing cannot resolve the characteristic function's decay.
struct NyquistViolation : Error { using Error::Error; };

// CF inversion produced more spurious negative mass than clipping may remove.
struct NegativeMass : Error { using Error::Error; };

// W_p requested with p ≥ α: a symmetric α-stable law has no p-th moment.
struct MomentViolation : Error { using Error::Error; };

// Empirical distance between samples of different sizes.
struct UnequalCounts : Error { using Error::Error; };

// Exact multivariate assignment requested beyond the supported sample count.
struct TooLargeForExact : Error { using Error::Error; };

// Limit law with singular covariance where a density is required.
struct SingularLimitLaw : Error { using Error::Error; };

// ── Simulation ────────────────────────────────────────────────────────────────

// Neither circulant embedding nor Cholesky yields a PSD covariance.
struct EmbeddingFailure : Error { using Error::Error; };

// Adaptive quadrature failed to reach the requested tolerance.
struct QuadratureFailure : Error { using Error::Error; };

// Convolution grid too coarse: the step-halving error estimate is too large.
struct GridTooCoarse : Error { using Error::Error; };

// Driver covariance tail at the truncation horizon exceeds the tolerance.
struct SlowDecay : Error { using Error::Error; };

// ── Scenarios ─────────────────────────────────────────────────────────────────

// Exact marginal law requested for a Monte-Carlo-only family.
struct NoExactLaw : Error { using Error::Error; };

// Scenario parameter absent.
struct MissingParameter : Error { using Error::Error; };

// Scenario parameter outside its admissible range.
struct InadmissibleRange : Error { using Error::Error; };

// ── Engine / IO ───────────────────────────────────────────────────────────────

// Schedule time t^cut + r·w fell at or below zero for a requested r.
struct NegativeTime : Error { using Error::Error; };

// Filesystem failure while emitting an artifact.
struct IoError : Error { using Error::Error; };

}  // namespace cutofflab
