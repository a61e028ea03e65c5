#include "cutofflab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "cutofflab/errors.hpp"

namespace cutofflab::spectral {

namespace {

constexpr double stability_tol = 1e-10;
constexpr double excitation_tol = 1e-10;
constexpr double rate_cluster_tol = 1e-8;
constexpr double rational_tol = 1e-9;
constexpr int max_denominator = 64;

std::string format_message(const char* fn, const char* what, double value) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s: %s (%.6g)", fn, what, value);
  return buf;
}

// One generalized eigenspace: a cluster of numerically equal eigenvalues.
struct EigenCluster {
  std::complex<double> mu;     // mean eigenvalue of the cluster
  int multiplicity = 0;        // algebraic multiplicity
  Eigen::MatrixXcd basis;      // kernel basis of (Λ−μI)^multiplicity
  Eigen::VectorXcd component;  // projection of x onto this eigenspace
  int chain_depth = 0;         // smallest k with (Λ−μI)^k·component ≈ 0
};

// Groups the eigenvalue list into clusters of numerically equal values.  A
// defective eigenvalue of multiplicity a is perturbed by O(eps^{1/a}) in
// floating point, so the grouping tolerance must sit well above sqrt(eps)
// while staying far below genuine spectral gaps.
std::vector<std::vector<int>> cluster_eigenvalues(const Eigen::VectorXcd& values,
                                                  double scale) {
  const double tol = 1e-5 * std::max(1.0, scale);
  const int n = static_cast<int>(values.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(values[i] - values[j]) < tol) parent[find(i)] = find(j);
  std::vector<std::vector<int>> groups(n);
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  return groups;
}

// Kernel basis of M (columns), via SVD with a relative rank threshold.
Eigen::MatrixXcd kernel_basis(const Eigen::MatrixXcd& m, int expected_dim) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
  const auto& singular = svd.singularValues();
  const double cutoff = 1e-8 * std::max(1.0, singular.size() ? singular(0) : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < singular.size(); ++i)
    if (singular(i) > cutoff) ++rank;
  const int dim = static_cast<int>(m.cols()) - rank;
  if (dim < expected_dim)
    throw Error(format_message("dominant_decomposition",
                               "generalized eigenspace defect, expected dimension",
                               expected_dim));
  return svd.matrixV().rightCols(expected_dim);
}

}  // namespace

// ── validate_stability ────────────────────────────────────────────────────────

StableMatrix validate_stability(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("validate_stability: matrix must be square");
  if (!matrix.allFinite())
    throw std::invalid_argument("validate_stability: matrix entries must be finite");

  Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix, /*computeEigenvectors=*/false);
  const Eigen::VectorXcd values = solver.eigenvalues();
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values.size(); ++i)
    margin = std::min(margin, values(i).real());
  if (!(margin > stability_tol))
    throw NotStable(format_message("validate_stability",
                                   "eigenvalue real part below stability margin",
                                   margin));
  return StableMatrix{matrix, margin};
}

// ── dominant_decomposition ────────────────────────────────────────────────────

DominantDecomposition dominant_decomposition(const StableMatrix& a,
                                             const Eigen::VectorXd& x) {
  const Eigen::Index m = a.dim();
  if (x.size() != m)
    throw std::invalid_argument("dominant_decomposition: datum dimension mismatch");
  const double xnorm = x.norm();
  if (xnorm <= 1e-14)
    throw ZeroInitialDatum("dominant_decomposition: initial datum is numerically zero");

  const Eigen::MatrixXcd lambda_c = a.matrix.cast<std::complex<double>>();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(lambda_c,
                                                     /*computeEigenvectors=*/false);
  const Eigen::VectorXcd values = solver.eigenvalues();

  // Generalized eigenspaces: kernel of (Λ−μI)^a per cluster.
  std::vector<EigenCluster> clusters;
  for (const auto& group : cluster_eigenvalues(values, a.matrix.norm())) {
    EigenCluster c;
    c.multiplicity = static_cast<int>(group.size());
    std::complex<double> mean{0.0, 0.0};
    for (int idx : group) mean += values(idx);
    c.mu = mean / static_cast<double>(c.multiplicity);
    Eigen::MatrixXcd shifted =
        lambda_c - c.mu * Eigen::MatrixXcd::Identity(m, m);
    Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(m, m);
    for (int k = 0; k < c.multiplicity; ++k) power = power * shifted;
    c.basis = kernel_basis(power, c.multiplicity);
    clusters.push_back(std::move(c));
  }

  // Decompose x along the direct sum of eigenspaces.
  Eigen::MatrixXcd full_basis(m, m);
  Eigen::Index col = 0;
  for (const auto& c : clusters) {
    full_basis.middleCols(col, c.multiplicity) = c.basis;
    col += c.multiplicity;
  }
  const Eigen::VectorXcd coords =
      full_basis.partialPivLu().solve(x.cast<std::complex<double>>());
  col = 0;
  for (auto& c : clusters) {
    c.component = c.basis * coords.segment(col, c.multiplicity);
    col += c.multiplicity;
  }

  // Dominant rate: smallest real part among excited eigenspaces.
  double rate = std::numeric_limits<double>::infinity();
  for (const auto& c : clusters)
    if (c.component.norm() > excitation_tol * xnorm)
      rate = std::min(rate, c.mu.real());
  if (!std::isfinite(rate))
    throw ZeroInitialDatum(
        "dominant_decomposition: datum excites no eigenspace above threshold");

  // Chain depth of x within each dominant cluster.
  int ell = 1;
  for (auto& c : clusters) {
    if (c.component.norm() <= excitation_tol * xnorm) continue;
    if (c.mu.real() > rate + rate_cluster_tol) continue;
    const Eigen::MatrixXcd shifted =
        lambda_c - c.mu * Eigen::MatrixXcd::Identity(m, m);
    Eigen::VectorXcd power = c.component;
    const double op_norm = std::max(1.0, shifted.operatorNorm());
    double scale = c.component.norm();
    c.chain_depth = c.multiplicity;
    for (int k = 1; k <= c.multiplicity; ++k) {
      power = shifted * power;
      scale *= op_norm;
      if (power.norm() <= 1e-10 * std::max(scale, 1.0)) {
        c.chain_depth = k;
        break;
      }
    }
    ell = std::max(ell, c.chain_depth);
  }

  // Mode vectors: only depth-ℓ clusters at the dominant rate contribute to
  // the t^{ℓ−1} order; v_c = (−1)^{ℓ−1}/(ℓ−1)!·(Λ−μI)^{ℓ−1}·x_c with phase
  // velocity θ_c = −Im μ_c.
  struct Mode {
    double theta;
    Eigen::VectorXcd vector;
  };
  std::vector<Mode> modes;
  double factorial = 1.0;
  for (int k = 2; k < ell; ++k) factorial *= k;
  const double mode_scale = ((ell - 1) % 2 == 0 ? 1.0 : -1.0) / factorial;
  for (const auto& c : clusters) {
    if (c.component.norm() <= excitation_tol * xnorm) continue;
    if (c.mu.real() > rate + rate_cluster_tol) continue;
    if (c.chain_depth != ell) continue;
    const Eigen::MatrixXcd shifted =
        lambda_c - c.mu * Eigen::MatrixXcd::Identity(m, m);
    Eigen::VectorXcd v = c.component;
    for (int k = 1; k < ell; ++k) v = shifted * v;
    modes.push_back({-c.mu.imag(), mode_scale * v});
  }

  // Order: zero-velocity modes first, then conjugate pairs with the positive
  // velocity leading, ascending in |θ|.
  std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    const double ma = std::abs(a.theta), mb = std::abs(b.theta);
    if (ma != mb) return ma < mb;
    return a.theta > b.theta;
  });

  DominantDecomposition dec;
  dec.rate = rate;
  dec.block_size = ell;
  dec.mode_count = static_cast<int>(modes.size());
  for (auto& mode : modes) {
    dec.angular_velocities.push_back(std::abs(mode.theta) < rate_cluster_tol
                                         ? 0.0
                                         : mode.theta);
    dec.mode_vectors.push_back(std::move(mode.vector));
  }
  return dec;
}

// ── dominant_trajectory ───────────────────────────────────────────────────────

Eigen::VectorXd dominant_trajectory(const DominantDecomposition& dec, double t) {
  if (dec.mode_count == 0 || dec.mode_vectors.empty())
    throw std::invalid_argument("dominant_trajectory: empty decomposition");
  const Eigen::Index m = dec.mode_vectors.front().size();
  Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(m);
  for (int j = 0; j < dec.mode_count; ++j) {
    const std::complex<double> phase =
        std::exp(std::complex<double>(0.0, dec.angular_velocities[j] * t));
    sum += phase * dec.mode_vectors[j];
  }
  // Conjugate pairing cancels the imaginary part; truncate the residue.
  return sum.real();
}

// ── hg_residual ───────────────────────────────────────────────────────────────

double hg_residual(const StableMatrix& a, const Eigen::VectorXd& x,
                   const DominantDecomposition& dec, double t) {
  if (!(t > 0.0))
    throw std::invalid_argument("hg_residual: time must be positive");

  // e^{λt}e^{−Λt} = e^{−(Λ−λI)t}: the shift moves the dominant eigenvalues
  // onto the imaginary axis, so entries grow at most like t^{ℓ−1}.
  const Eigen::Index m = a.dim();
  const Eigen::MatrixXd shifted =
      -(a.matrix - dec.rate * Eigen::MatrixXd::Identity(m, m)) * t;
  const Eigen::MatrixXd propagator = shifted.exp();
  const double denom = std::pow(t, dec.block_size - 1);
  const Eigen::VectorXd rescaled = (propagator * x) / denom;
  if (!rescaled.allFinite() || !std::isfinite(denom))
    throw Overflow(format_message("hg_residual",
                                  "rescaled trajectory not representable at t", t));
  return (rescaled - dominant_trajectory(dec, t)).norm();
}

// ── omega_limit_set ───────────────────────────────────────────────────────────

namespace {

// Best rational approximation p/q of v with q ≤ max_denominator, by
// continued fractions; returns false when no q reaches rational_tol.
bool rational_within(double v, int& p_out, int& q_out) {
  double frac = v;
  long long p0 = 1, q0 = 0;  // convergent k−2
  long long p1 = static_cast<long long>(std::floor(frac)), q1 = 1;
  double rem = frac - std::floor(frac);
  for (int iter = 0; iter < 64; ++iter) {
    if (std::abs(v - static_cast<double>(p1) / static_cast<double>(q1)) < rational_tol &&
        q1 <= max_denominator) {
      p_out = static_cast<int>(p1);
      q_out = static_cast<int>(q1);
      return true;
    }
    if (rem < 1e-15) break;
    const double inv = 1.0 / rem;
    const long long digit = static_cast<long long>(std::floor(inv));
    rem = inv - std::floor(inv);
    const long long p2 = digit * p1 + p0;
    const long long q2 = digit * q1 + q0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    if (q1 > max_denominator) break;
  }
  return false;
}

}  // namespace

OmegaLimitSet omega_limit_set(const DominantDecomposition& dec, int resolution) {
  if (resolution < 16)
    throw std::invalid_argument("omega_limit_set: resolution must be at least 16");

  std::vector<double> nonzero;
  for (double theta : dec.angular_velocities)
    if (theta != 0.0) nonzero.push_back(theta);

  OmegaLimitSet omega;
  if (nonzero.empty()) {
    omega.kind = OmegaLimitSet::Kind::point;
    omega.samples.push_back(dominant_trajectory(dec, 0.0));
    omega.diameter = 0.0;
    return omega;
  }

  // Finite orbit on the unit-time lattice iff every θ/(2π) is rational with
  // small denominator; the common period is the lcm of the denominators.
  bool all_rational = true;
  long long period = 1;
  for (double theta : nonzero) {
    int p = 0, q = 1;
    if (!rational_within(theta / (2.0 * std::numbers::pi), p, q)) {
      all_rational = false;
      break;
    }
    period = std::lcm(period, static_cast<long long>(q));
    if (period > 4096) {  // orbit too long to enumerate; treat as dense
      all_rational = false;
      break;
    }
  }

  if (all_rational) {
    omega.kind = OmegaLimitSet::Kind::finite_orbit;
    for (long long k = 0; k < period; ++k)
      omega.samples.push_back(dominant_trajectory(dec, static_cast<double>(k)));
  } else {
    omega.kind = OmegaLimitSet::Kind::torus_closure;
    double theta_min = std::numeric_limits<double>::infinity();
    for (double theta : nonzero) theta_min = std::min(theta_min, std::abs(theta));
    // Golden-ratio stepping equidistributes the phases without resonances.
    constexpr double golden = 0.61803398874989485;
    const double step = (2.0 * std::numbers::pi / theta_min) * golden;
    for (int k = 0; k < resolution; ++k)
      omega.samples.push_back(dominant_trajectory(dec, step * k));
  }

  double diameter = 0.0;
  for (std::size_t i = 0; i < omega.samples.size(); ++i)
    for (std::size_t j = i + 1; j < omega.samples.size(); ++j)
      diameter = std::max(diameter, (omega.samples[i] - omega.samples[j]).norm());
  omega.diameter = diameter;
  return omega;
}

// ── cutoff_time_scale ─────────────────────────────────────────────────────────

CutoffSchedule cutoff_time_scale(double lambda, int ell, const ScaleFunction& sigma,
                                 double epsilon, double w) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("cutoff_time_scale: rate must be positive");
  if (ell < 1)
    throw std::invalid_argument("cutoff_time_scale: block size must be at least 1");
  if (!(w > 0.0))
    throw std::invalid_argument("cutoff_time_scale: window must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw InvalidEpsilon(format_message("cutoff_time_scale",
                                        "epsilon must lie in (0,1)", epsilon));

  CutoffSchedule sched;
  sched.epsilon = epsilon;
  sched.window_w = w;
  sched.t_star = std::log(1.0 / epsilon) / lambda;
  const double scale_at_star = sigma(sched.t_star);
  if (!(scale_at_star > 0.0) || !std::isfinite(scale_at_star))
    throw NonPositiveScale(format_message("cutoff_time_scale",
                                          "sigma(t*) must be positive",
                                          scale_at_star));
  sched.t_cut = sched.t_star +
                (ell - 1) / lambda * std::log(lambda * sched.t_star) -
                std::log(scale_at_star) / lambda;
  return sched;
}

// ── asymptotic_prefactor ──────────────────────────────────────────────────────

PrefactorPair asymptotic_prefactor(const CutoffSchedule& sched, double r,
                                   double lambda, int ell,
                                   const ScaleFunction& sigma) {
  const double t = sched.t_cut + r * sched.window_w;
  if (!(t > 0.0))
    throw std::invalid_argument(
        "asymptotic_prefactor: evaluation time t^cut + r·w must be positive");

  // Log-space evaluation: the individual factors e^{−λt} and 1/ε span
  // hundreds of orders of magnitude while their product stays O(1).
  const double log_finite = (ell - 1) * std::log(t) - lambda * t -
                            std::log(sched.epsilon) - std::log(sigma(t));
  PrefactorPair pair;
  pair.finite_value = std::exp(log_finite);
  pair.limit_value =
      std::exp((1 - ell) * std::log(lambda) - lambda * r * sched.window_w);
  return pair;
}

}  // namespace cutofflab::spectral
