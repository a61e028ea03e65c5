#pragma once

/*
 * Cut-off experiment orchestration.
 *
 * The normalized marginal X^ε_t(x)/(ε σ_t) approaches its limit law Z along
 * the schedule t^cut_ε + r·w.  The distance curve r ↦ d(X, Z) converges, as
 * ε → 0, to the window profile
 *
 *     TV:   d_TV(λ^{1−ℓ} e^{−λrw} v + Z, Z)
 *     W_p:  λ^{1−ℓ} e^{−λrw} ‖v‖          (the same for every p ≥ 1),
 *
 * with v drawn from the ω-limit set of the dominant trajectory of e^{−Λt}x.
 * The cut-off is a profile when v ↦ d(ρv + Z, Z) is constant over ω(x) for
 * every ρ > 0, and window-only otherwise; then the liminf/limsup envelopes
 * are attained at the extremal directions v̌ (argmin) and v̂ (argmax).
 *
 * Admissible scales σ are slowly varying: σ_t/σ_{t+r} → 1 for every r and
 * σ_t = o(e^{ct}) for every c > 0, which karamata_check verifies numerically.
 */

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "cutofflab/scale.hpp"
#include "cutofflab/scenarios.hpp"
#include "cutofflab/spectral.hpp"

namespace cutofflab::engine {

// ── types ─────────────────────────────────────────────────────────────────────

// One distance curve along t^cut_ε + r·w.  All vectors share the r grid's
// length; measured is empty for theoretical-only curves, and stderr_bars are
// zero on exact evaluation paths (bootstrap bars on Monte Carlo paths).
struct ProfileCurve {
  std::vector<double> r_grid;
  std::vector<double> times;
  std::vector<double> measured;
  std::vector<double> theoretical;
  std::vector<double> stderr_bars;
  double epsilon = 0.0;  // 0 marks the ε → 0 theoretical-only curve
  spectral::CutoffSchedule schedule;
  scenarios::MetricChoice metric;
};

enum class CutoffClass { profile, window_only };

// Shared report of the classification and convergence experiments; each
// operation fills its own fields and leaves the rest empty.
struct CutoffReport {
  CutoffClass classification = CutoffClass::profile;

  // Constancy of v ↦ d(ρv + Z, Z) over ω(x): per-ρ spread (max − min over
  // the ω samples) and its maximum over the ρ grid, with the extremal
  // directions at the worst ρ.
  double spread = 0.0;
  std::vector<double> rho_grid;
  std::vector<double> spread_by_rho;
  Eigen::VectorXd v_check;  // attains the minimum distance
  Eigen::VectorXd v_hat;    // attains the maximum distance

  // Convergence along a decreasing ε list: per-ε curves, sup_r gaps between
  // measured and theoretical, and the count of r entries dropped because
  // t^cut_ε + r·w ≤ 0.
  std::vector<double> epsilons;
  std::vector<double> sup_gaps;
  std::vector<ProfileCurve> curves;
  std::vector<std::size_t> negative_time_counts;
  bool gaps_decreasing = true;

  // Envelope profiles evaluated at v̌ and v̂ when window-only: over the
  // request's r grid in convergence_report, over a default window grid
  // (w = 1) in cutoff_classification.
  std::vector<double> envelope_r_grid;
  std::vector<double> liminf_profile;
  std::vector<double> limsup_profile;
};

// Slow-variation verdict: ratio table σ(t_max)/σ(t_max + r) against 1, plus
// the sub-exponential decay of ln σ(t) − c·t between t_max/2 and t_max.
struct KaramataReport {
  bool pass = false;
  std::vector<double> r_list;
  std::vector<double> ratios;
  double worst_deviation = 0.0;
  bool subexponential = false;
  double log_tail_drop = 0.0;  // (ln σ − ct) at t_max/2 minus its value at t_max
};

// ── operations ────────────────────────────────────────────────────────────────

// Measured and theoretical distance along t^cut_ε + r·w.  TV is computed on
// exact laws (zero-homogeneity makes the ε·σ_t normalization immaterial);
// W_p on the normalized laws: exact closed forms where available, otherwise
// the scenario's Monte Carlo evaluation with bootstrap error bars.  Throws
// NegativeTime when some r puts the schedule at or below zero.
ProfileCurve distance_curve(const scenarios::Scenario& s, double epsilon,
                            const std::vector<double>& r_grid, double w);

// Theoretical-only limiting profile (ε-free).
ProfileCurve profile_curve(const scenarios::Scenario& s,
                           const std::vector<double>& r_grid, double w);

// Constancy classification of v ↦ d(ρv + Z, Z) over the ω-limit set, maximized
// over the ρ grid: profile iff the spread stays within tol.  Window-only
// verdicts come with liminf/limsup envelope profiles at the extremal
// directions.
CutoffReport cutoff_classification(const scenarios::Scenario& s,
                                   const std::vector<double>& rho_grid, double tol);

// Distance curves for a strictly decreasing ε list: sup-gaps per ε with the
// decrease verdict (one inversion within 3 bootstrap sigmas is tolerated on
// Monte Carlo paths), NegativeTime entries flagged per ε rather than thrown,
// and liminf/limsup envelopes over the r grid when the scenario is window-only.
CutoffReport convergence_report(const scenarios::Scenario& s,
                                const std::vector<double>& epsilon_list,
                                const std::vector<double>& r_grid, double w);

// Verifies σ(t_max)/σ(t_max + r) within 1e-3 of 1 for each listed r and the
// sub-exponential bound σ_t e^{−ct} ↓ for c = 1e-2; never throws on a failing
// scale, the report carries the offending ratio.
KaramataReport karamata_check(const ScaleFunction& sigma,
                              const std::vector<double>& r_list, double t_max);

}  // namespace cutofflab::engine
