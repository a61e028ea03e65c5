/*
 * Engine internals.
 *
 * Measured distances along the schedule t = t^cut_ε + r·w:
 *   exact Gaussian:  TV closed forms; W_p by the monotone coupling
 *                    (E|δ + Δs·G|^p)^{1/p}, multivariate only for equal
 *                    covariances where the optimal coupling is the mean shift.
 *   exact stable:    both laws are location-scale of one standard L, so
 *                    TV inverts the two CFs on a shared grid and
 *                    W_p^p = E|Δloc + Δs·L|^p with Δs = c₁^{1/α} − c₂^{1/α},
 *                    integrated against the inverted density with the
 *                    power-law tail Γ(α+1)sin(πα/2)/π · l^{−α−1} appended.
 *   Monte Carlo:     empirical W_p between the scenario sample and a limit-law
 *                    sample; per-cell streams derive from (seed, ε-index,
 *                    r-index) so curves are reproducible at any thread count;
 *                    error bars by multinomial bootstrap over sorted samples.
 *
 * Theoretical values come from the window profiles with v drawn from the
 * ω-limit set (the median-norm sample as representative); the integrated
 * families use the fluctuation direction −x/λ in place of the trajectory.
 */

#include "cutofflab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cutofflab/errors.hpp"
#include "cutofflab/metrics.hpp"
#include "cutofflab/parallel.hpp"
#include "cutofflab/rng.hpp"

namespace cutofflab::engine {
namespace {

constexpr std::uint64_t kCellTag = 0xCE11CE11ULL;
constexpr std::uint64_t kLimitTag = 0x1101A71AULL;
constexpr std::uint64_t kBootstrapTag = 0xB007B007ULL;
constexpr int kOmegaResolution = 128;
constexpr std::size_t kBootstrapResamples = 200;
constexpr double kEqualCovarianceTol = 1e-12;
constexpr double kClassificationTol = 1e-6;
constexpr double kRatioTol = 1e-3;
constexpr double kSubexpRate = 1e-2;
// ln(1e12): the CF must fall below 1e-12 at the grid's Nyquist frequency.
constexpr double kCfDecayGate = 27.631021115928547;
// Per-law grid truncation mass; tv_from_densities reports it as tail_mass.
constexpr double kTailMassPerLaw = 5e-7;

std::string format_message(const char* fn, const char* what, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return std::string(fn) + ": " + what + " " + buffer;
}

std::string message(const char* fn, const char* what) {
  return std::string(fn) + ": " + what;
}

// ── profile data ─────────────────────────────────────────────────────────────

struct ProfileData {
  double lambda = 0.0;
  int ell = 1;
  spectral::OmegaLimitSet omega;
  Eigen::VectorXd representative;
  metrics::LawDescriptor limit;
};

ProfileData profile_data(const scenarios::Scenario& s) {
  ProfileData pd;
  const auto dec = spectral::dominant_decomposition(s.drift, s.x);
  pd.lambda = dec.rate;
  pd.ell = dec.block_size;
  using scenarios::Family;
  if (s.family == Family::integrated_ou_gaussian ||
      s.family == Family::integrated_ou_stable) {
    // The fluctuation center is −(x/λ)e^{−λt}/(ε σ_t): the window shift
    // direction is the single point −x/λ.
    pd.omega.kind = spectral::OmegaLimitSet::Kind::point;
    pd.omega.samples = {Eigen::VectorXd::Constant(1, -s.x(0) / pd.lambda)};
    pd.omega.diameter = 0.0;
  } else {
    pd.omega = spectral::omega_limit_set(dec, kOmegaResolution);
  }
  // Deterministic representative: the sample attaining the median norm.
  std::vector<std::size_t> order(pd.omega.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double na = pd.omega.samples[a].norm();
    const double nb = pd.omega.samples[b].norm();
    return na != nb ? na < nb : a < b;
  });
  pd.representative = pd.omega.samples[order[(order.size() - 1) / 2]];
  pd.limit = scenarios::scenario_limit_law(s);
  return pd;
}

scenarios::Scenario with_epsilon(scenarios::Scenario s, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw InvalidEpsilon(
        format_message("distance_curve", "epsilon must lie in (0,1), got", epsilon));
  if (s.family == scenarios::Family::averaging) {
    // ε_N = 1/√N: keep the component count consistent for the samplers.
    const auto n = static_cast<std::size_t>(std::llround(1.0 / (epsilon * epsilon)));
    if (n < 2)
      throw InadmissibleRange(format_message(
          "distance_curve", "averaging needs epsilon <= 1/sqrt(2), got", epsilon));
    s.n_components = n;
  }
  s.epsilon = epsilon;
  return s;
}

// ── stable-law distances ─────────────────────────────────────────────────────

Eigen::VectorXd stable_grid(const metrics::StableLawDescriptor& a,
                            const metrics::StableLawDescriptor& b, double spacing_cap) {
  const double alpha = a.alpha;
  const double c_min = std::min(a.scale_c, b.scale_c);
  const double c_max = std::max(a.scale_c, b.scale_c);
  // Spacing: the wider CF (smaller c) must decay below 1e-12 at π/h.
  const double h = std::min(
      spacing_cap,
      0.9 * std::numbers::pi * std::pow(c_min / kCfDecayGate, 1.0 / alpha));
  // Half-width: both tails truncated below kTailMassPerLaw, locations covered.
  const double tail_const =
      std::tgamma(alpha) * std::sin(std::numbers::pi * alpha / 2.0) / std::numbers::pi;
  double half = std::pow(2.0 * tail_const * c_max / kTailMassPerLaw, 1.0 / alpha);
  half += std::max(std::abs(a.location), std::abs(b.location));
  const auto m = static_cast<Eigen::Index>(std::ceil(half / h));
  Eigen::VectorXd grid(2 * m + 1);
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    grid(i) = static_cast<double>(i - m) * h;
  return grid;
}

double stable_tv_exact(const metrics::StableLawDescriptor& a,
                       const metrics::StableLawDescriptor& b) {
  if (a.alpha != b.alpha)
    throw UnsupportedCase(message("distance_curve", "stable laws with distinct alpha"));
  const Eigen::VectorXd grid = stable_grid(a, b, 0.25);
  return metrics::tv_from_densities(metrics::density_from_cf(a, grid),
                                    metrics::density_from_cf(b, grid))
      .value;
}

// W_p under the quantile coupling: both laws are loc + c^{1/α}·L for one
// standard L, so W_p^p = E|Δloc + Δs·L|^p, integrated on the inverted density
// of L with the analytic tail ∫_{|l|>R} |Δs·l|^p f(l) dl appended.
double stable_pair_wp(const metrics::StableLawDescriptor& a,
                      const metrics::StableLawDescriptor& b, double p) {
  if (a.alpha != b.alpha)
    throw UnsupportedCase(message("distance_curve", "stable laws with distinct alpha"));
  const double alpha = a.alpha;
  if (!(p < alpha))
    throw MomentViolation(
        format_message("distance_curve", "stable law has no moment of order", p));
  const double delta = a.location - b.location;
  const double ds = std::pow(a.scale_c, 1.0 / alpha) - std::pow(b.scale_c, 1.0 / alpha);
  if (ds == 0.0) return std::abs(delta);

  const metrics::StableLawDescriptor standard{alpha, 1.0, 0.0};
  const Eigen::VectorXd grid = stable_grid(standard, standard, 0.0625);
  const metrics::DensityGrid density = metrics::density_from_cf(standard, grid);
  const Eigen::Index n = grid.size();
  const double h = grid(1) - grid(0);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double weight = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    acc += weight * std::pow(std::abs(delta + ds * grid(i)), p) * density.f(i);
  }
  acc *= h;
  // Tail beyond R, to leading order in δ/(Δs·R).
  const double tail_const = std::tgamma(alpha + 1.0) *
                            std::sin(std::numbers::pi * alpha / 2.0) / std::numbers::pi;
  const double r_max = grid(n - 1);
  acc += 2.0 * std::pow(std::abs(ds), p) * tail_const * std::pow(r_max, p - alpha) /
         (alpha - p);
  return std::pow(acc, 1.0 / p);
}

// ── exact distance dispatch ──────────────────────────────────────────────────

double exact_distance(const metrics::LawDescriptor& law,
                      const metrics::LawDescriptor& limit,
                      const scenarios::MetricChoice& metric) {
  const auto* g1 = std::get_if<metrics::GaussianLaw>(&law);
  const auto* g2 = std::get_if<metrics::GaussianLaw>(&limit);
  const auto* s1 = std::get_if<metrics::StableLawDescriptor>(&law);
  const auto* s2 = std::get_if<metrics::StableLawDescriptor>(&limit);

  if (metric.kind == scenarios::MetricChoice::Kind::total_variation) {
    if (g1 && g2) return metrics::tv_gaussian(*g1, *g2);
    if (s1 && s2) return stable_tv_exact(*s1, *s2);
    throw UnsupportedCase(message("distance_curve", "mismatched law kinds"));
  }

  if (g1 && g2) {
    if (g1->dim() == 1)
      return metrics::wp_gaussian_univariate(
          g1->mean(0), std::sqrt(g1->covariance(0, 0)), g2->mean(0),
          std::sqrt(g2->covariance(0, 0)), metric.p);
    // Equal covariances: the optimal coupling is the mean shift.
    const double gap = (g1->covariance - g2->covariance).norm();
    const double ref = std::max(
        {1.0, g1->covariance.norm(), g2->covariance.norm()});
    if (gap <= kEqualCovarianceTol * ref) return (g1->mean - g2->mean).norm();
    throw UnsupportedCase(
        message("distance_curve",
                "exact multivariate W_p needs equal covariances; "
                "use monte_carlo evaluation"));
  }
  if (s1 && s2) return stable_pair_wp(*s1, *s2, metric.p);
  throw UnsupportedCase(message("distance_curve", "mismatched law kinds"));
}

// ── theoretical profile values ───────────────────────────────────────────────

double theoretical_value(const ProfileData& pd, const Eigen::VectorXd& v, double w,
                         double r, const scenarios::MetricChoice& metric) {
  if (metric.kind == scenarios::MetricChoice::Kind::wasserstein)
    return metrics::profile_wp(pd.lambda, pd.ell, w, v, r, metric.p);
  if (const auto* z = std::get_if<metrics::GaussianLaw>(&pd.limit))
    return metrics::profile_tv(pd.lambda, pd.ell, w, v, *z, r);
  const auto& z = std::get<metrics::StableLawDescriptor>(pd.limit);
  const double shift = std::pow(pd.lambda, 1.0 - static_cast<double>(pd.ell)) *
                       std::exp(-pd.lambda * r * w) * v(0);
  metrics::StableLawDescriptor shifted = z;
  shifted.location += shift;
  return stable_tv_exact(shifted, z);
}

// ── limit-law sampling and bootstrap ─────────────────────────────────────────

Eigen::MatrixXd sample_limit(const metrics::LawDescriptor& law, std::size_t n,
                             Rng rng) {
  if (const auto* g = std::get_if<metrics::GaussianLaw>(&law)) {
    const Eigen::Index m = g->dim();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g->covariance);
    const Eigen::MatrixXd factor =
        es.eigenvectors() *
        es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), m);
    Eigen::VectorXd z(m);
    for (Eigen::Index j = 0; j < out.rows(); ++j) {
      for (Eigen::Index k = 0; k < m; ++k) z(k) = rng.normal();
      out.row(j) = (g->mean + factor * z).transpose();
    }
    return out;
  }
  const auto& st = std::get<metrics::StableLawDescriptor>(law);
  const double scale = std::pow(st.scale_c, 1.0 / st.alpha);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), 1);
  for (Eigen::Index j = 0; j < out.rows(); ++j)
    out(j, 0) = st.location + scale * rng.stable(st.alpha);
  return out;
}

void draw_counts(std::vector<std::uint32_t>& counts, Rng& rng) {
  const std::size_t n = counts.size();
  std::fill(counts.begin(), counts.end(), 0u);
  for (std::size_t k = 0; k < n; ++k) {
    auto idx = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n));
    if (idx >= n) idx = n - 1;
    ++counts[idx];
  }
}

// Quantile coupling of two resampled empirical laws given by sorted values
// with multiplicities.
double resampled_wp(const std::vector<double>& xs, const std::vector<double>& zs,
                    const std::vector<std::uint32_t>& cx,
                    const std::vector<std::uint32_t>& cz, double p) {
  const std::size_t n = xs.size();
  double acc = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  std::uint32_t ri = cx[0];
  std::uint32_t rj = cz[0];
  for (;;) {
    while (i < n && ri == 0) {
      ++i;
      if (i < n) ri = cx[i];
    }
    while (j < n && rj == 0) {
      ++j;
      if (j < n) rj = cz[j];
    }
    if (i >= n || j >= n) break;
    const std::uint32_t take = std::min(ri, rj);
    acc += static_cast<double>(take) * std::pow(std::abs(xs[i] - zs[j]), p);
    ri -= take;
    rj -= take;
  }
  return std::pow(acc / static_cast<double>(n), 1.0 / p);
}

struct McResult {
  double value = 0.0;
  double stderr_bar = 0.0;
};

McResult mc_distance(const scenarios::Scenario& s, double t, const ProfileData& pd,
                     std::size_t eps_index, std::size_t r_index) {
  const std::size_t n = s.evaluation.sample_count;
  std::uint64_t cell_seed = s.evaluation.seed;
  for (std::uint64_t id : {kCellTag, static_cast<std::uint64_t>(eps_index),
                           static_cast<std::uint64_t>(r_index)})
    cell_seed = detail::fold_stream_id(cell_seed, id);
  const Eigen::MatrixXd xs = scenarios::sample_normalized(s, t, n, cell_seed);
  const Eigen::MatrixXd zs = sample_limit(pd.limit, n, stream_for(cell_seed, kLimitTag));

  McResult result;
  if (xs.cols() > 1) {
    // Exact-assignment W_p; too costly to bootstrap, so no error bar.
    result.value = metrics::wp_empirical(xs, zs, s.metric.p);
    return result;
  }

  std::vector<double> x_sorted(xs.col(0).data(), xs.col(0).data() + xs.rows());
  std::vector<double> z_sorted(zs.col(0).data(), zs.col(0).data() + zs.rows());
  std::sort(x_sorted.begin(), x_sorted.end());
  std::sort(z_sorted.begin(), z_sorted.end());
  const double p = s.metric.p;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += std::pow(std::abs(x_sorted[i] - z_sorted[i]), p);
  result.value = std::pow(acc / static_cast<double>(n), 1.0 / p);

  Rng boot = stream_for(cell_seed, kBootstrapTag);
  std::vector<std::uint32_t> cx(n);
  std::vector<std::uint32_t> cz(n);
  std::vector<double> replicas(kBootstrapResamples);
  for (double& replica : replicas) {
    draw_counts(cx, boot);
    draw_counts(cz, boot);
    replica = resampled_wp(x_sorted, z_sorted, cx, cz, p);
  }
  const double mean =
      std::accumulate(replicas.begin(), replicas.end(), 0.0) /
      static_cast<double>(replicas.size());
  double var = 0.0;
  for (double replica : replicas) var += (replica - mean) * (replica - mean);
  result.stderr_bar =
      std::sqrt(var / static_cast<double>(replicas.size() - 1));
  return result;
}

// ── curve evaluation ─────────────────────────────────────────────────────────

ProfileCurve curve_impl(const scenarios::Scenario& base, double epsilon,
                        const std::vector<double>& r_grid, double w,
                        std::size_t eps_index, const ProfileData& pd) {
  const scenarios::Scenario s = with_epsilon(base, epsilon);
  const auto schedule =
      spectral::cutoff_time_scale(pd.lambda, pd.ell, s.scale, epsilon, w);

  ProfileCurve curve;
  curve.r_grid = r_grid;
  curve.epsilon = epsilon;
  curve.schedule = schedule;
  curve.metric = s.metric;
  const std::size_t cells = r_grid.size();
  curve.times.resize(cells);
  curve.measured.resize(cells);
  curve.theoretical.resize(cells);
  curve.stderr_bars.assign(cells, 0.0);

  for (double r : r_grid) {
    if (!(schedule.t_cut + r * w > 0.0))
      throw NegativeTime(
          format_message("distance_curve", "t^cut + r*w not positive at r =", r));
  }

  const bool monte_carlo =
      s.evaluation.kind == scenarios::Evaluation::Kind::monte_carlo;
  const auto cell = [&](std::size_t i) {
    const double t = schedule.t_cut + r_grid[i] * w;
    curve.times[i] = t;
    curve.theoretical[i] = theoretical_value(pd, pd.representative, w, r_grid[i], s.metric);
    if (monte_carlo) {
      const McResult res = mc_distance(s, t, pd, eps_index, i);
      curve.measured[i] = res.value;
      curve.stderr_bars[i] = res.stderr_bar;
    } else {
      curve.measured[i] =
          exact_distance(scenarios::exact_marginal_law(s, t), pd.limit, s.metric);
    }
  };
  // Monte Carlo cells parallelize inside the sampler; exact cells here.
  if (monte_carlo) {
    for (std::size_t i = 0; i < cells; ++i) cell(i);
  } else {
    parallel_for(cells, cell);
  }
  return curve;
}

// Distance of the shifted limit law d(ρv + Z, Z) for the classification map.
double classification_distance(const ProfileData& pd, const Eigen::VectorXd& shift,
                               const scenarios::MetricChoice& metric) {
  if (metric.kind == scenarios::MetricChoice::Kind::wasserstein)
    return shift.norm();  // shift-additivity: W_p(v + Z, Z) = ‖v‖
  if (const auto* z = std::get_if<metrics::GaussianLaw>(&pd.limit)) {
    metrics::GaussianLaw shifted{z->mean + shift, z->covariance};
    return metrics::tv_gaussian(shifted, *z);
  }
  const auto& z = std::get<metrics::StableLawDescriptor>(pd.limit);
  metrics::StableLawDescriptor shifted = z;
  shifted.location += shift(0);
  return stable_tv_exact(shifted, z);
}

CutoffReport classify(const scenarios::Scenario& s, const ProfileData& pd,
                      const std::vector<double>& rho_grid, double tol) {
  CutoffReport report;
  report.rho_grid = rho_grid;
  report.spread_by_rho.assign(rho_grid.size(), 0.0);
  const auto& samples = pd.omega.samples;
  double worst = -1.0;
  for (std::size_t k = 0; k < rho_grid.size(); ++k) {
    const double rho = rho_grid[k];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::size_t arg_lo = 0;
    std::size_t arg_hi = 0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const double d = classification_distance(pd, rho * samples[j], s.metric);
      if (d < lo) {
        lo = d;
        arg_lo = j;
      }
      if (d > hi) {
        hi = d;
        arg_hi = j;
      }
    }
    report.spread_by_rho[k] = hi - lo;
    if (hi - lo > worst) {
      worst = hi - lo;
      report.v_check = samples[arg_lo];
      report.v_hat = samples[arg_hi];
    }
  }
  report.spread = std::max(worst, 0.0);
  report.classification =
      report.spread <= tol ? CutoffClass::profile : CutoffClass::window_only;
  if (report.classification == CutoffClass::window_only) {
    // Default envelope window: r ∈ [−3, 3] step 1/2 at w = 1;
    // convergence_report replaces this with the request's grid.
    for (int k = -6; k <= 6; ++k) report.envelope_r_grid.push_back(0.5 * k);
    for (double r : report.envelope_r_grid) {
      report.liminf_profile.push_back(
          theoretical_value(pd, report.v_check, 1.0, r, s.metric));
      report.limsup_profile.push_back(
          theoretical_value(pd, report.v_hat, 1.0, r, s.metric));
    }
  }
  return report;
}

}  // namespace

// ── operations ────────────────────────────────────────────────────────────────

ProfileCurve distance_curve(const scenarios::Scenario& s, double epsilon,
                            const std::vector<double>& r_grid, double w) {
  if (r_grid.empty())
    throw InadmissibleRange(message("distance_curve", "empty r grid"));
  if (!(w > 0.0))
    throw InadmissibleRange(format_message("distance_curve", "window must be positive, got", w));
  return curve_impl(s, epsilon, r_grid, w, 0, profile_data(s));
}

ProfileCurve profile_curve(const scenarios::Scenario& s,
                           const std::vector<double>& r_grid, double w) {
  if (r_grid.empty())
    throw InadmissibleRange(message("profile_curve", "empty r grid"));
  if (!(w > 0.0))
    throw InadmissibleRange(format_message("profile_curve", "window must be positive, got", w));
  const ProfileData pd = profile_data(s);
  ProfileCurve curve;
  curve.r_grid = r_grid;
  curve.metric = s.metric;
  curve.epsilon = 0.0;  // the ε → 0 limit object
  curve.theoretical.resize(r_grid.size());
  for (std::size_t i = 0; i < r_grid.size(); ++i)
    curve.theoretical[i] =
        theoretical_value(pd, pd.representative, w, r_grid[i], s.metric);
  return curve;
}

CutoffReport cutoff_classification(const scenarios::Scenario& s,
                                   const std::vector<double>& rho_grid, double tol) {
  if (rho_grid.empty())
    throw InadmissibleRange(message("cutoff_classification", "empty rho grid"));
  for (double rho : rho_grid)
    if (!(rho > 0.0))
      throw InadmissibleRange(
          format_message("cutoff_classification", "rho must be positive, got", rho));
  if (!(tol > 0.0))
    throw InadmissibleRange(
        format_message("cutoff_classification", "tolerance must be positive, got", tol));
  return classify(s, profile_data(s), rho_grid, tol);
}

CutoffReport convergence_report(const scenarios::Scenario& s,
                                const std::vector<double>& epsilon_list,
                                const std::vector<double>& r_grid, double w) {
  const char* fn = "convergence_report";
  if (epsilon_list.empty()) throw InadmissibleRange(message(fn, "empty epsilon list"));
  if (r_grid.empty()) throw InadmissibleRange(message(fn, "empty r grid"));
  if (!(w > 0.0))
    throw InadmissibleRange(format_message(fn, "window must be positive, got", w));
  for (std::size_t i = 1; i < epsilon_list.size(); ++i)
    if (!(epsilon_list[i] < epsilon_list[i - 1]))
      throw InadmissibleRange(message(fn, "epsilon list must be strictly decreasing"));

  const ProfileData pd = profile_data(s);
  CutoffReport report = classify(s, pd, {1.0}, kClassificationTol);
  report.epsilons = epsilon_list;

  std::vector<double> sup_stderr;
  for (std::size_t e = 0; e < epsilon_list.size(); ++e) {
    const double epsilon = epsilon_list[e];
    const auto schedule =
        spectral::cutoff_time_scale(pd.lambda, pd.ell, s.scale, epsilon, w);
    std::vector<double> kept;
    std::size_t flagged = 0;
    for (double r : r_grid) {
      if (schedule.t_cut + r * w > 0.0)
        kept.push_back(r);
      else
        ++flagged;
    }
    report.negative_time_counts.push_back(flagged);
    ProfileCurve curve = curve_impl(s, epsilon, kept, w, e, pd);
    double gap = 0.0;
    double gap_stderr = 0.0;
    for (std::size_t i = 0; i < curve.measured.size(); ++i) {
      const double g = std::abs(curve.measured[i] - curve.theoretical[i]);
      if (g > gap) {
        gap = g;
        gap_stderr = curve.stderr_bars[i];
      }
    }
    report.sup_gaps.push_back(gap);
    sup_stderr.push_back(gap_stderr);
    report.curves.push_back(std::move(curve));
  }

  // Decrease verdict: exact paths must decrease outright; Monte Carlo paths
  // may show one inversion, and only within 3 bootstrap sigmas.
  const bool monte_carlo =
      s.evaluation.kind == scenarios::Evaluation::Kind::monte_carlo;
  std::size_t inversions = 0;
  report.gaps_decreasing = true;
  for (std::size_t i = 1; i < report.sup_gaps.size(); ++i) {
    if (report.sup_gaps[i] <= report.sup_gaps[i - 1]) continue;
    ++inversions;
    const double band = 3.0 * (sup_stderr[i] + sup_stderr[i - 1]);
    if (!monte_carlo || inversions > 1 ||
        report.sup_gaps[i] - report.sup_gaps[i - 1] > band)
      report.gaps_decreasing = false;
  }

  if (report.classification == CutoffClass::window_only) {
    report.envelope_r_grid = r_grid;
    report.liminf_profile.assign(r_grid.size(), 0.0);
    report.limsup_profile.assign(r_grid.size(), 0.0);
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
      report.liminf_profile[i] =
          theoretical_value(pd, report.v_check, w, r_grid[i], s.metric);
      report.limsup_profile[i] =
          theoretical_value(pd, report.v_hat, w, r_grid[i], s.metric);
    }
  }
  return report;
}

KaramataReport karamata_check(const ScaleFunction& sigma,
                              const std::vector<double>& r_list, double t_max) {
  const char* fn = "karamata_check";
  if (!(t_max > 0.0) || !std::isfinite(t_max))
    throw InadmissibleRange(format_message(fn, "t_max must be positive, got", t_max));

  KaramataReport report;
  report.r_list = r_list;
  for (double r : r_list) {
    if (!(t_max + r > 0.0))
      throw InadmissibleRange(format_message(fn, "t_max + r must be positive at r =", r));
    const double num = sigma(t_max);
    const double den = sigma(t_max + r);
    if (!(num > 0.0) || !(den > 0.0))
      throw NonPositiveScale(message(fn, "scale must be positive on the probe points"));
    const double ratio = num / den;
    report.ratios.push_back(ratio);
    report.worst_deviation = std::max(report.worst_deviation, std::abs(ratio - 1.0));
  }

  // Sub-exponential consequence: g(t) = ln σ_t − c·t must fall on
  // [t_max/2, t_max]; slow variation forces σ_t = o(e^{ct}) for every c > 0.
  const double g_half = std::log(sigma(t_max / 2.0)) - kSubexpRate * t_max / 2.0;
  const double g_full = std::log(sigma(t_max)) - kSubexpRate * t_max;
  report.log_tail_drop = g_half - g_full;
  report.subexponential = g_full < g_half;
  report.pass = report.worst_deviation <= kRatioTol && report.subexponential;
  return report;
}

}  // namespace cutofflab::engine
