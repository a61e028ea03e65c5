/*
 * Family catalog: validation, exact laws, and normalized sampling.
 *
 * Laws are stated for X^ε_t(x)/(ε·σ_t), the renormalization every distance
 * curve evaluates.
 *
 *   fou_1d / averaging    N(e^{−λt}x/ε, R(0)(1 + e^{−2λt}) − 2e^{−λt}R(t)),
 *                         R the stationary fOU covariance; ε = 1/√N for the
 *                         average of N copies.
 *   multivariate          N(e^{−Λt}x/ε, Σ_t); ΛΣ_t + Σ_tΛᵀ = C − e^{−Λt}Ce^{−Λᵀt}
 *                         is the integrated Lyapunov identity, solved through
 *                         the Kronecker form (I⊗Λ + Λ⊗I)vec(Σ) = vec(rhs).
 *   generalized_ou        S_t = U_t − e^{−Λt}U_0 for stationary U gives
 *                         Cov(S_t) = R(0) + PR(0)Pᵀ − PR(t) − R(t)ᵀPᵀ with
 *                         P = e^{−Λt}.
 *   iterated_ou           finite-t and limit covariances from the quadrature
 *                         in the simulation module.
 *   inhomogeneous         N(e^{−λt}x/ε, e^{−2λt}∫_0^t e^{2λs}τ(s)²ds).
 *   integrated gaussian   N(−(x/λ)e^{−λt}/(ε√t), (1/λ²)(1 − (2/λt)(1−e^{−λt})
 *                         + (1/2λt)(1−e^{−2λt}))).
 *   integrated stable     symmetric α-stable, scale (c_α/λ^α)(1/t)∫_0^t(1−e^{−λr})^αdr,
 *                         location −(x/λ)e^{−λt}/(ε·t^{1/α}).
 */

#include "cutofflab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <variant>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "cutofflab/errors.hpp"
#include "cutofflab/rng.hpp"
#include "cutofflab/simulate.hpp"
#include "parallel_for.hpp"

namespace cutofflab::scenarios {

namespace {

constexpr std::uint64_t kScenarioTag = 0x5CEA5CEA;
// Tolerance handed to the iterated-OU covariance quadrature.
constexpr double kIteratedTol = 1e-8;
// Symmetry / positivity gates for user-supplied covariance matrices.
constexpr double kSymmetryTol = 1e-12;
constexpr double kEigenvalueTol = 1e-10;
// Grid resolution for the Monte Carlo iterated-OU convolution.
constexpr double kIteratedStep = 0.01;
constexpr std::size_t kIteratedMaxPoints = 512;

std::string format_message(const char* fn, const char* what, double value) {
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer), "%s: %s (%.6g)", fn, what, value);
  return buffer;
}

std::string message(const char* fn, const char* what) {
  return std::string(fn) + ": " + what;
}

// ── validation helpers ────────────────────────────────────────────────────────

spectral::StableMatrix resolve_drift(const char* fn, const ScenarioParams& params,
                                     bool scalar_only) {
  if (params.drift.has_value() && params.lambda.has_value())
    throw InadmissibleRange(message(fn, "give either drift or lambda, not both"));
  Eigen::MatrixXd matrix;
  if (params.lambda.has_value())
    matrix = Eigen::MatrixXd::Constant(1, 1, *params.lambda);
  else if (params.drift.has_value())
    matrix = *params.drift;
  else
    throw MissingParameter(message(fn, "drift matrix (or lambda) is required"));
  if (scalar_only && matrix.rows() != 1)
    throw InadmissibleRange(
        format_message(fn, "this family expects a scalar rate; got dimension",
                       static_cast<double>(matrix.rows())));
  return spectral::validate_stability(matrix);
}

Eigen::VectorXd resolve_x(const char* fn, const ScenarioParams& params,
                          Eigen::Index dim) {
  if (params.x.has_value() && params.x_scalar.has_value())
    throw InadmissibleRange(message(fn, "give either x or x_scalar, not both"));
  Eigen::VectorXd x;
  if (params.x_scalar.has_value())
    x = Eigen::VectorXd::Constant(1, *params.x_scalar);
  else if (params.x.has_value())
    x = *params.x;
  else
    throw MissingParameter(message(fn, "initial datum x is required"));
  if (x.size() != dim)
    throw InadmissibleRange(format_message(fn, "x size must match the drift; got",
                                           static_cast<double>(x.size())));
  if (x.norm() == 0.0)
    throw InadmissibleRange(message(fn, "initial datum must be nonzero"));
  return x;
}

double resolve_epsilon(const char* fn, const ScenarioParams& params) {
  if (!params.epsilon.has_value())
    throw MissingParameter(message(fn, "epsilon is required"));
  const double epsilon = *params.epsilon;
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw InadmissibleRange(format_message(fn, "epsilon must lie in (0,1)", epsilon));
  return epsilon;
}

double resolve_hurst(const char* fn, const ScenarioParams& params) {
  if (!params.hurst.has_value())
    throw MissingParameter(message(fn, "hurst exponent is required"));
  const double hurst = *params.hurst;
  if (!(hurst > 0.0) || !(hurst < 1.0))
    throw InadmissibleRange(
        format_message(fn, "hurst exponent must lie in (0,1)", hurst));
  return hurst;
}

void check_covariance_matrix(const char* fn, const char* what,
                             const Eigen::MatrixXd& c, Eigen::Index dim) {
  if (c.rows() != dim || c.cols() != dim)
    throw InadmissibleRange(format_message(fn, "covariance size must match the drift; got rows",
                                           static_cast<double>(c.rows())));
  const double scale = std::max(1.0, c.norm());
  if ((c - c.transpose()).norm() > kSymmetryTol * scale)
    throw InadmissibleRange(message(fn, what) + " must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(c);
  const double max_eig = std::max(1.0, eigen.eigenvalues().maxCoeff());
  if (eigen.eigenvalues().minCoeff() < -kEigenvalueTol * max_eig)
    throw InadmissibleRange(format_message(fn, "covariance must be positive semidefinite; min eigenvalue",
                                           eigen.eigenvalues().minCoeff()));
}

void apply_metric_and_evaluation(const char* fn, const ScenarioParams& params,
                                 Scenario& s, MetricChoice fallback_metric,
                                 Evaluation fallback_evaluation) {
  s.metric = params.metric.value_or(fallback_metric);
  s.evaluation = params.evaluation.value_or(fallback_evaluation);
  if (s.metric.kind == MetricChoice::Kind::wasserstein && !(s.metric.p >= 1.0))
    throw InadmissibleRange(format_message(fn, "wasserstein order must be >= 1", s.metric.p));
  if (s.family == Family::integrated_ou_stable &&
      s.metric.kind == MetricChoice::Kind::wasserstein && !(s.metric.p < s.alpha))
    throw InadmissibleRange(format_message(
        fn, "wasserstein order must stay below the stable index", s.metric.p));
  if (s.metric.kind == MetricChoice::Kind::total_variation &&
      s.evaluation.kind == Evaluation::Kind::monte_carlo)
    throw InadmissibleRange(message(
        fn, "total variation needs exact laws; empirical samples support only wasserstein"));
  if (s.evaluation.kind == Evaluation::Kind::monte_carlo &&
      s.evaluation.sample_count < 2)
    throw InadmissibleRange(format_message(
        fn, "monte carlo evaluation needs at least two samples",
        static_cast<double>(s.evaluation.sample_count)));
}

// ── Lyapunov solve ────────────────────────────────────────────────────────────

// Solves ΛX + XΛᵀ = B; vec is column-major, so I⊗Λ lands on the block diagonal
// and Λ⊗I scatters Λ(j,k) across same-row entries.
Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& drift, const Eigen::MatrixXd& b) {
  const Eigen::Index m = drift.rows();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m * m, m * m);
  for (Eigen::Index j = 0; j < m; ++j) k.block(j * m, j * m, m, m) += drift;
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index col = 0; col < m; ++col)
      for (Eigen::Index i = 0; i < m; ++i) k(j * m + i, col * m + i) += drift(j, col);
  Eigen::VectorXd rhs(m * m);
  for (Eigen::Index col = 0; col < m; ++col) rhs.segment(col * m, m) = b.col(col);
  const Eigen::VectorXd solution = k.partialPivLu().solve(rhs);
  Eigen::MatrixXd result(m, m);
  for (Eigen::Index col = 0; col < m; ++col) result.col(col) = solution.segment(col * m, m);
  return 0.5 * (result + result.transpose());
}

// ── shared law pieces ─────────────────────────────────────────────────────────

// R(0)(1 + e^{−2λt}) − 2e^{−λt}R(t) for the fOU noise S_t = U_t − e^{−λt}U_0.
double fou_bridge_variance(double lambda, double hurst, double t) {
  const double r0 = simulate::fou_stationary_covariance(lambda, hurst, 0.0);
  if (t == 0.0) return 0.0;
  const double decay = std::exp(-lambda * t);
  const double rt = simulate::fou_stationary_covariance(lambda, hurst, t);
  return r0 * (1.0 + decay * decay) - 2.0 * decay * rt;
}

metrics::GaussianLaw univariate_gaussian(double mean, double variance) {
  metrics::GaussianLaw law;
  law.mean = Eigen::VectorXd::Constant(1, mean);
  law.covariance = Eigen::MatrixXd::Constant(1, 1, variance);
  return law;
}

double scalar_rate(const Scenario& s) { return s.drift.matrix(0, 0); }

// Cov(S_t) = R(0) + PR(0)Pᵀ − PR(t) − R(t)ᵀPᵀ for S_t = U_t − e^{−Λt}U_0.
Eigen::MatrixXd stationary_bridge_covariance(const Scenario& s, double t) {
  const Eigen::MatrixXd r0 = s.driver_covariance(0.0);
  if (t == 0.0) return Eigen::MatrixXd::Zero(r0.rows(), r0.cols());
  const Eigen::MatrixXd p = (-s.drift.matrix * t).exp();
  const Eigen::MatrixXd rt = s.driver_covariance(t);
  Eigen::MatrixXd cov = r0 + p * r0 * p.transpose() - p * rt - rt.transpose() * p.transpose();
  return 0.5 * (cov + cov.transpose());
}

// ── sampling helpers ──────────────────────────────────────────────────────────

Eigen::MatrixXd sample_gaussian(const metrics::GaussianLaw& law, std::size_t n,
                                std::uint64_t seed) {
  const Eigen::Index m = law.dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(law.covariance);
  const Eigen::MatrixXd factor =
      eigen.eigenvectors() * eigen.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(n), m);
  cutofflab::detail::parallel_for(n, [&](std::size_t j) {
    Rng rng = stream_for(seed, kScenarioTag, j);
    Eigen::VectorXd normals(m);
    for (Eigen::Index i = 0; i < m; ++i) normals[i] = rng.normal();
    samples.row(static_cast<Eigen::Index>(j)) = (law.mean + factor * normals).transpose();
  });
  return samples;
}

Eigen::MatrixXd sample_stable(const metrics::StableLawDescriptor& law, std::size_t n,
                              std::uint64_t seed) {
  const double spread = std::pow(law.scale_c, 1.0 / law.alpha);
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(n), 1);
  cutofflab::detail::parallel_for(n, [&](std::size_t j) {
    Rng rng = stream_for(seed, kScenarioTag, j);
    samples(static_cast<Eigen::Index>(j), 0) = law.location + spread * rng.stable(law.alpha);
  });
  return samples;
}

// Scalar stationary-driver grid samples at {0, …, t}; column 0 of each path.
simulate::PathEnsemble sample_scalar_driver(const Scenario& s,
                                            const simulate::TimeGrid& grid,
                                            std::size_t n, std::uint64_t seed) {
  simulate::DriverSpec spec;
  spec.kind = simulate::DriverKind::stationary_gaussian;
  spec.grid = grid;
  const auto kernel = s.driver_covariance;
  spec.covariance = [kernel](double lag) { return kernel(lag)(0, 0); };
  return simulate::sample_driver(spec, n, seed);
}

Eigen::MatrixXd constant_samples(std::size_t n, const Eigen::VectorXd& value) {
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(n), value.size());
  samples.rowwise() = value.transpose();
  return samples;
}

}  // namespace

// ── family names ──────────────────────────────────────────────────────────────

const char* family_name(Family family) {
  switch (family) {
    case Family::fou_1d: return "fou_1d";
    case Family::multivariate_gaussian_linear: return "multivariate_gaussian_linear";
    case Family::averaging: return "averaging";
    case Family::generalized_ou: return "generalized_ou";
    case Family::iterated_ou: return "iterated_ou";
    case Family::inhomogeneous: return "inhomogeneous";
    case Family::integrated_ou_gaussian: return "integrated_ou_gaussian";
    case Family::integrated_ou_stable: return "integrated_ou_stable";
  }
  return "unknown";
}

std::optional<Family> family_from_name(std::string_view name) {
  for (Family family : {Family::fou_1d, Family::multivariate_gaussian_linear,
                        Family::averaging, Family::generalized_ou, Family::iterated_ou,
                        Family::inhomogeneous, Family::integrated_ou_gaussian,
                        Family::integrated_ou_stable})
    if (name == family_name(family)) return family;
  return std::nullopt;
}

// ── driver covariance helpers ─────────────────────────────────────────────────

std::function<Eigen::MatrixXd(double)> ou_driver_covariance(
    const spectral::StableMatrix& theta, const Eigen::MatrixXd& stationary_covariance) {
  check_covariance_matrix("ou_driver_covariance", "stationary covariance",
                          stationary_covariance, theta.dim());
  const Eigen::MatrixXd drift = theta.matrix;
  const Eigen::MatrixXd sigma = stationary_covariance;
  return [drift, sigma](double s) -> Eigen::MatrixXd { return (-drift * s).exp() * sigma; };
}

std::function<Eigen::MatrixXd(double)> fou_driver_covariance(double lambda,
                                                             double hurst) {
  const char* fn = "fou_driver_covariance";
  if (!(lambda > 0.0))
    throw InadmissibleRange(format_message(fn, "rate must be positive", lambda));
  if (!(hurst > 0.0) || !(hurst < 1.0))
    throw InadmissibleRange(format_message(fn, "hurst exponent must lie in (0,1)", hurst));
  return [lambda, hurst](double s) {
    return Eigen::MatrixXd::Constant(
        1, 1, simulate::fou_stationary_covariance(lambda, hurst, std::abs(s)));
  };
}

std::function<Eigen::MatrixXd(double)> exponential_driver_covariance(double variance,
                                                                     double rate) {
  const char* fn = "exponential_driver_covariance";
  if (!(variance > 0.0))
    throw InadmissibleRange(format_message(fn, "variance must be positive", variance));
  if (!(rate > 0.0))
    throw InadmissibleRange(format_message(fn, "rate must be positive", rate));
  return [variance, rate](double s) {
    return Eigen::MatrixXd::Constant(1, 1, variance * std::exp(-rate * std::abs(s)));
  };
}

// ── build_scenario ────────────────────────────────────────────────────────────

Scenario build_scenario(Family family, const ScenarioParams& params) {
  const char* fn = "build_scenario";
  Scenario s;
  s.family = family;

  const bool scalar_only = family != Family::multivariate_gaussian_linear &&
                           family != Family::generalized_ou &&
                           family != Family::iterated_ou;
  s.drift = resolve_drift(fn, params, scalar_only);
  s.x = resolve_x(fn, params, s.drift.dim());

  MetricChoice default_metric;
  Evaluation default_evaluation;

  switch (family) {
    case Family::fou_1d:
      s.epsilon = resolve_epsilon(fn, params);
      s.hurst = resolve_hurst(fn, params);
      break;
    case Family::multivariate_gaussian_linear:
      s.epsilon = resolve_epsilon(fn, params);
      s.noise_covariance = params.noise_covariance.value_or(
          Eigen::MatrixXd::Identity(s.drift.dim(), s.drift.dim()));
      check_covariance_matrix(fn, "noise covariance", s.noise_covariance, s.drift.dim());
      break;
    case Family::averaging: {
      if (params.epsilon.has_value())
        throw InadmissibleRange(
            message(fn, "averaging derives epsilon from n_components"));
      if (!params.n_components.has_value())
        throw MissingParameter(message(fn, "n_components is required"));
      if (*params.n_components < 2)
        throw InadmissibleRange(format_message(
            fn, "averaging needs at least two components",
            static_cast<double>(*params.n_components)));
      s.n_components = *params.n_components;
      s.epsilon = 1.0 / std::sqrt(static_cast<double>(s.n_components));
      s.hurst = resolve_hurst(fn, params);
      default_metric.kind = MetricChoice::Kind::wasserstein;
      default_evaluation.kind = Evaluation::Kind::monte_carlo;
      break;
    }
    case Family::generalized_ou:
      s.epsilon = resolve_epsilon(fn, params);
      if (!params.driver_covariance)
        throw MissingParameter(message(fn, "driver covariance is required"));
      s.driver_covariance = params.driver_covariance;
      check_covariance_matrix(fn, "driver covariance at lag 0",
                              s.driver_covariance(0.0), s.drift.dim());
      break;
    case Family::iterated_ou:
      s.epsilon = resolve_epsilon(fn, params);
      if (!params.driver_covariance)
        throw MissingParameter(message(fn, "driver covariance is required"));
      s.driver_covariance = params.driver_covariance;
      check_covariance_matrix(fn, "driver covariance at lag 0",
                              s.driver_covariance(0.0), s.drift.dim());
      if (!params.driver_horizon.has_value())
        throw MissingParameter(message(fn, "driver_horizon is required"));
      s.driver_horizon = *params.driver_horizon;
      if (!(s.driver_horizon > 0.0))
        throw InadmissibleRange(
            format_message(fn, "driver_horizon must be positive", s.driver_horizon));
      break;
    case Family::inhomogeneous:
      s.epsilon = resolve_epsilon(fn, params);
      if (!params.tau) throw MissingParameter(message(fn, "tau is required"));
      s.tau = params.tau;
      if (!params.tau_limit.has_value())
        throw MissingParameter(message(fn, "tau_limit is required"));
      s.tau_limit = *params.tau_limit;
      if (!(s.tau_limit > 0.0))
        throw InadmissibleRange(
            format_message(fn, "tau_limit must be positive", s.tau_limit));
      if (!(s.tau(0.0) > 0.0))
        throw InadmissibleRange(format_message(fn, "tau must be positive; tau(0)", s.tau(0.0)));
      break;
    case Family::integrated_ou_gaussian:
      s.epsilon = resolve_epsilon(fn, params);
      s.y = params.y.value_or(0.0);
      s.scale = ScaleFunction::sqrt_t();
      break;
    case Family::integrated_ou_stable: {
      s.epsilon = resolve_epsilon(fn, params);
      s.y = params.y.value_or(0.0);
      if (!params.alpha.has_value())
        throw MissingParameter(message(fn, "alpha is required"));
      s.alpha = *params.alpha;
      if (!(s.alpha > 1.0) || !(s.alpha < 2.0))
        throw InadmissibleRange(
            format_message(fn, "stable index must lie in (1,2)", s.alpha));
      s.c_alpha = params.c_alpha.value_or(1.0);
      if (!(s.c_alpha > 0.0))
        throw InadmissibleRange(
            format_message(fn, "c_alpha must be positive", s.c_alpha));
      s.scale = ScaleFunction::power(1.0 / s.alpha);
      break;
    }
  }

  apply_metric_and_evaluation(fn, params, s, default_metric, default_evaluation);
  return s;
}

// ── scenario_limit_law ────────────────────────────────────────────────────────

metrics::LawDescriptor scenario_limit_law(const Scenario& s) {
  switch (s.family) {
    case Family::fou_1d:
    case Family::averaging:
      return univariate_gaussian(
          0.0, simulate::fou_stationary_covariance(scalar_rate(s), s.hurst, 0.0));
    case Family::multivariate_gaussian_linear: {
      metrics::GaussianLaw law;
      law.mean = Eigen::VectorXd::Zero(s.drift.dim());
      law.covariance = lyapunov_solve(s.drift.matrix, s.noise_covariance);
      return law;
    }
    case Family::generalized_ou: {
      metrics::GaussianLaw law;
      law.mean = Eigen::VectorXd::Zero(s.drift.dim());
      const Eigen::MatrixXd r0 = s.driver_covariance(0.0);
      law.covariance = 0.5 * (r0 + r0.transpose());
      return law;
    }
    case Family::iterated_ou: {
      metrics::GaussianLaw law;
      law.mean = Eigen::VectorXd::Zero(s.drift.dim());
      law.covariance = simulate::iterated_ou_limit_covariance(
          s.drift, s.driver_covariance, s.driver_horizon, kIteratedTol);
      return law;
    }
    case Family::inhomogeneous: {
      const double lambda = scalar_rate(s);
      return univariate_gaussian(0.0, s.tau_limit * s.tau_limit / (2.0 * lambda));
    }
    case Family::integrated_ou_gaussian: {
      const double lambda = scalar_rate(s);
      return univariate_gaussian(0.0, 1.0 / (lambda * lambda));
    }
    case Family::integrated_ou_stable: {
      metrics::StableLawDescriptor law;
      law.alpha = s.alpha;
      law.scale_c = s.c_alpha / std::pow(scalar_rate(s), s.alpha);
      law.location = 0.0;
      return law;
    }
  }
  throw NoExactLaw("scenario_limit_law: unhandled family");
}

// ── exact_marginal_law ────────────────────────────────────────────────────────

metrics::LawDescriptor exact_marginal_law(const Scenario& s, double t) {
  const char* fn = "exact_marginal_law";
  if (!(t >= 0.0)) throw InadmissibleRange(format_message(fn, "time must be >= 0", t));
  if (std::isinf(t)) return scenario_limit_law(s);

  const bool integrated = s.family == Family::integrated_ou_gaussian ||
                          s.family == Family::integrated_ou_stable;
  if (integrated && t == 0.0)
    throw InadmissibleRange(
        message(fn, "the integrated families need t > 0 since sigma(0) = 0"));

  switch (s.family) {
    case Family::fou_1d:
    case Family::averaging: {
      const double lambda = scalar_rate(s);
      const double mean = std::exp(-lambda * t) * s.x(0) / s.epsilon;
      return univariate_gaussian(mean, fou_bridge_variance(lambda, s.hurst, t));
    }
    case Family::multivariate_gaussian_linear: {
      const Eigen::MatrixXd decay = (-s.drift.matrix * t).exp();
      metrics::GaussianLaw law;
      law.mean = decay * s.x / s.epsilon;
      law.covariance = lyapunov_solve(
          s.drift.matrix,
          s.noise_covariance - decay * s.noise_covariance * decay.transpose());
      return law;
    }
    case Family::generalized_ou: {
      metrics::GaussianLaw law;
      law.mean = (-s.drift.matrix * t).exp() * s.x / s.epsilon;
      law.covariance = stationary_bridge_covariance(s, t);
      return law;
    }
    case Family::iterated_ou: {
      metrics::GaussianLaw law;
      law.mean = (-s.drift.matrix * t).exp() * s.x / s.epsilon;
      if (t == 0.0)
        law.covariance = Eigen::MatrixXd::Zero(s.drift.dim(), s.drift.dim());
      else
        law.covariance = simulate::iterated_ou_covariance(s.drift, s.driver_covariance,
                                                          t, kIteratedTol);
      return law;
    }
    case Family::inhomogeneous: {
      const double lambda = scalar_rate(s);
      const double mean = std::exp(-lambda * t) * s.x(0) / s.epsilon;
      const double variance =
          simulate::inhomogeneous_variance(lambda, s.tau, s.tau_limit, t).value;
      return univariate_gaussian(mean, variance);
    }
    case Family::integrated_ou_gaussian: {
      const auto law = std::get<metrics::GaussianLaw>(simulate::integrated_ou_law(
          scalar_rate(s), s.epsilon, s.x(0), s.y, t,
          simulate::IntegratedDriverKind::gaussian));
      return univariate_gaussian(law.mean(0) / s.epsilon,
                                 law.covariance(0, 0) / (s.epsilon * s.epsilon));
    }
    case Family::integrated_ou_stable: {
      auto law = std::get<metrics::StableLawDescriptor>(simulate::integrated_ou_law(
          scalar_rate(s), s.epsilon, s.x(0), s.y, t,
          simulate::IntegratedDriverKind::stable, s.alpha, s.c_alpha));
      law.scale_c /= std::pow(s.epsilon, s.alpha);
      law.location /= s.epsilon;
      return law;
    }
  }
  throw NoExactLaw(message(fn, "no closed-form marginal for this family"));
}

// ── marginal_law ──────────────────────────────────────────────────────────────

metrics::LawDescriptor marginal_law(const Scenario& s, double t) {
  if (s.evaluation.kind == Evaluation::Kind::exact) return exact_marginal_law(s, t);
  metrics::EmpiricalLaw law;
  law.samples = sample_normalized(s, t, s.evaluation.sample_count, s.evaluation.seed);
  return law;
}

// ── sample_normalized ─────────────────────────────────────────────────────────

Eigen::MatrixXd sample_normalized(const Scenario& s, double t, std::size_t n,
                                  std::uint64_t seed) {
  const char* fn = "sample_normalized";
  if (!(t >= 0.0) || std::isinf(t))
    throw InadmissibleRange(format_message(fn, "time must be finite and >= 0", t));
  if (n < 2)
    throw InadmissibleRange(
        format_message(fn, "need at least two samples", static_cast<double>(n)));

  switch (s.family) {
    case Family::fou_1d: {
      const double lambda = scalar_rate(s);
      const double mean = std::exp(-lambda * t) * s.x(0) / s.epsilon;
      if (t == 0.0) return constant_samples(n, Eigen::VectorXd::Constant(1, mean));
      const simulate::TimeGrid grid{t, 2};
      const auto noise = simulate::average_ensemble(lambda, s.hurst, 0.0, 1, grid, n,
                                                    seed, simulate::AveragingMode::direct);
      Eigen::MatrixXd samples(static_cast<Eigen::Index>(n), 1);
      for (std::size_t j = 0; j < n; ++j)
        samples(static_cast<Eigen::Index>(j), 0) = mean + noise.paths[j](1, 0);
      return samples;
    }
    case Family::averaging: {
      const double lambda = scalar_rate(s);
      const double root_n = 1.0 / s.epsilon;
      if (t == 0.0) return constant_samples(n, Eigen::VectorXd::Constant(1, s.x(0) * root_n));
      const simulate::TimeGrid grid{t, 2};
      const auto ensemble =
          simulate::average_ensemble(lambda, s.hurst, s.x(0), s.n_components, grid, n,
                                     seed, simulate::AveragingMode::automatic);
      Eigen::MatrixXd samples(static_cast<Eigen::Index>(n), 1);
      for (std::size_t j = 0; j < n; ++j)
        samples(static_cast<Eigen::Index>(j), 0) = ensemble.paths[j](1, 0) * root_n;
      return samples;
    }
    case Family::generalized_ou: {
      if (s.drift.dim() > 1) break;  // exact-law draw below
      const double lambda = scalar_rate(s);
      const double decay = std::exp(-lambda * t);
      const double mean = decay * s.x(0) / s.epsilon;
      if (t == 0.0) return constant_samples(n, Eigen::VectorXd::Constant(1, mean));
      const simulate::TimeGrid grid{t, 2};
      const auto stationary = sample_scalar_driver(s, grid, n, seed);
      Eigen::MatrixXd samples(static_cast<Eigen::Index>(n), 1);
      for (std::size_t j = 0; j < n; ++j) {
        const double u0 = stationary.paths[j](0, 0);
        const double ut = stationary.paths[j](1, 0);
        samples(static_cast<Eigen::Index>(j), 0) = mean + ut - decay * u0;
      }
      return samples;
    }
    case Family::iterated_ou: {
      if (s.drift.dim() > 1) break;  // exact-law draw below
      const double lambda = scalar_rate(s);
      const double mean = std::exp(-lambda * t) * s.x(0) / s.epsilon;
      if (t == 0.0) return constant_samples(n, Eigen::VectorXd::Constant(1, mean));
      const std::size_t points = std::min<std::size_t>(
          kIteratedMaxPoints, 2 + static_cast<std::size_t>(std::ceil(t / kIteratedStep)));
      const simulate::TimeGrid grid{t / static_cast<double>(points - 1), points};
      const auto driver = sample_scalar_driver(s, grid, n, seed);
      const auto convolved = simulate::stochastic_convolution(s.drift, driver);
      Eigen::MatrixXd samples(static_cast<Eigen::Index>(n), 1);
      for (std::size_t j = 0; j < n; ++j)
        samples(static_cast<Eigen::Index>(j), 0) =
            mean + convolved.paths[j](static_cast<Eigen::Index>(points - 1), 0);
      return samples;
    }
    case Family::integrated_ou_stable:
      return sample_stable(
          std::get<metrics::StableLawDescriptor>(exact_marginal_law(s, t)), n, seed);
    default:
      break;
  }
  return sample_gaussian(std::get<metrics::GaussianLaw>(exact_marginal_law(s, t)), n,
                         seed);
}

}  // namespace cutofflab::scenarios
