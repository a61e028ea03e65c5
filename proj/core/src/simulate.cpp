/*
 * Driver ensembles, the stochastic convolution, and the example-family laws.
 *
 * Convolution by parts, S_t = D_t − e^{−Λt}D_0 − ∫_0^t Λe^{−Λ(t−s)}D_s ds,
 * becomes one matrix recursion per grid step with E = e^{−Λh}:
 *
 *     J_{k+1} = E·J_k + (h/2)·(E·ΛD_k + ΛD_{k+1}),   P_{k+1} = E·P_k,
 *     S_k = D_k − P_k − J_k,
 *
 * which is exactly the composite trapezoid rule with precomputed offsets.
 * Jump drivers use S_{k+1} = E·S_k + ΔD_{k+1} instead.
 *
 * The iterated-OU covariance of S_t for a stationary Gaussian driver with
 * covariance R_D expands, with P = e^{−Λt}, K₁ = ∫_0^t R_D(u)e^{−Λᵀu}Λᵀdu,
 * K₂ = ∫_0^t Λe^{−Λ(t−s)}R_D(s)ds, and the double term
 * I₃ = ∫∫_{[0,t]²} Λe^{−Λu}R_D(w−u)e^{−Λᵀw}Λᵀ du dw, to
 *
 *     Cov(S_t) = R_D(0) − R_D(t)Pᵀ − P R_D(t)ᵀ + P R_D(0) Pᵀ
 *                − K₁ − K₁ᵀ + P K₂ᵀ + K₂ Pᵀ + I₃,
 *
 * whose t → ∞ limit drops every P term.  The scalar OU-driver case has the
 * closed form Σ = R_D(0)·θ/(λ+θ), which the tests pin independently through
 * the joint (S, D) Lyapunov equation.
 */

#include "cutofflab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "cutofflab/errors.hpp"
#include "cutofflab/rng.hpp"
#include "fbm_sampler.hpp"
#include "parallel_for.hpp"

namespace cutofflab::simulate {

namespace {

constexpr double kGramEigenvalueTol = 1e-10;
constexpr double kConvolutionTol = 1e-4;
constexpr std::uint64_t kDriverTag = 0xD21AD21A;
constexpr std::uint64_t kAverageTag = 0xA7E8A7E8;

std::string format_message(const char* fn, const char* what, double value) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s: %s (%.6g)", fn, what, value);
  return buf;
}

void validate_grid(const char* fn, const TimeGrid& grid) {
  if (!(grid.step > 0.0) || !std::isfinite(grid.step))
    throw std::invalid_argument(format_message(fn, "grid step must be positive", grid.step));
  if (grid.count < 2)
    throw std::invalid_argument(
        format_message(fn, "grid needs at least two points", static_cast<double>(grid.count)));
}

bool is_jump_kind(DriverKind kind) { return kind == DriverKind::stable; }

// 15-point Gauss–Legendre nodes of one panel, appended as (abscissa, weight).
void append_gauss_nodes(double lo, double hi, std::vector<std::pair<double, double>>& out) {
  using rule = boost::math::quadrature::gauss<double, 15>;
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const auto& abscissa = rule::abscissa();
  const auto& weights = rule::weights();
  out.emplace_back(mid, half * weights[0]);  // abscissa[0] == 0
  for (std::size_t j = 1; j < abscissa.size(); ++j) {
    out.emplace_back(mid - half * abscissa[j], half * weights[j]);
    out.emplace_back(mid + half * abscissa[j], half * weights[j]);
  }
}

std::vector<std::pair<double, double>> composite_gauss_nodes(double length,
                                                             std::size_t panels) {
  std::vector<std::pair<double, double>> nodes;
  nodes.reserve(15 * panels);
  const double width = length / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p)
    append_gauss_nodes(width * static_cast<double>(p),
                       width * static_cast<double>(p + 1), nodes);
  return nodes;
}

// Cov(S_t) truncated to [0, t]; with drop_boundary (the t → ∞ limit) every
// e^{−Λt} term is omitted and t is only the truncation horizon.
Eigen::MatrixXd iterated_covariance_at_resolution(
    const Eigen::MatrixXd& drift, const std::function<Eigen::MatrixXd(double)>& r,
    double t, std::size_t panels, bool drop_boundary) {
  const Eigen::Index m = drift.rows();
  const auto nodes = composite_gauss_nodes(t, panels);
  const std::size_t q = nodes.size();

  std::vector<Eigen::MatrixXd> forward(q);   // Λe^{−Λ·s_i}
  std::vector<Eigen::MatrixXd> backward(q);  // Λe^{−Λ·(t−s_i)}, boundary terms only
  for (std::size_t i = 0; i < q; ++i) {
    forward[i] = drift * (-drift * nodes[i].first).exp();
    if (!drop_boundary) backward[i] = drift * (-drift * (t - nodes[i].first)).exp();
  }

  std::vector<Eigen::MatrixXd> r_at(q);
  for (std::size_t i = 0; i < q; ++i) r_at[i] = r(nodes[i].first);

  Eigen::MatrixXd k1 = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < q; ++i)
    k1.noalias() += nodes[i].second * r_at[i] * forward[i].transpose();

  // The double term over the square splits as T + Tᵀ with T on the triangle
  // u < w, where R sees nonnegative lags only.  Panel pairs strictly above
  // the diagonal reuse the shared nodes; each diagonal panel integrates its
  // inner variable on [u, panel end] with a fresh rule.  Both pieces avoid
  // the |w − u| kink, so the composite rule converges at spectral rate.
  std::vector<Eigen::MatrixXd> scaled_t(q);
  for (std::size_t j = 0; j < q; ++j)
    scaled_t[j] = (nodes[j].second * forward[j]).transpose();
  const std::size_t per_panel = q / panels;
  const double width = t / static_cast<double>(panels);
  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
  std::vector<std::pair<double, double>> inner;
  for (std::size_t i = 0; i < q; ++i) {
    Eigen::MatrixXd row = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t j = (i / per_panel + 1) * per_panel; j < q; ++j)
      row.noalias() += r(nodes[j].first - nodes[i].first) * scaled_t[j];
    const double u = nodes[i].first;
    inner.clear();
    append_gauss_nodes(u, width * static_cast<double>(i / per_panel + 1), inner);
    for (const auto& [w, wt] : inner)
      row.noalias() += r(w - u) * (wt * drift * (-drift * w).exp()).transpose();
    tri.noalias() += (nodes[i].second * forward[i]) * row;
  }

  Eigen::MatrixXd cov = r(0.0) - k1 - k1.transpose() + tri + tri.transpose();
  if (!drop_boundary) {
    const Eigen::MatrixXd p = (-drift * t).exp();
    Eigen::MatrixXd k2 = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < q; ++i)
      k2.noalias() += nodes[i].second * backward[i] * r_at[i];
    const Eigen::MatrixXd rt = r(t);
    cov += -rt * p.transpose() - p * rt.transpose() + p * r(0.0) * p.transpose() +
           p * k2.transpose() + k2 * p.transpose();
  }
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd iterated_covariance_adaptive(
    const char* fn, const spectral::StableMatrix& a,
    const std::function<Eigen::MatrixXd(double)>& r, double t, double tol,
    bool drop_boundary) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument(format_message(fn, "horizon must be positive", t));
  if (!(tol > 0.0))
    throw std::invalid_argument(format_message(fn, "tolerance must be positive", tol));
  const double tail = r(t).norm();
  if (tail >= tol)
    throw SlowDecay(format_message(fn, "driver covariance tail above tolerance", tail));

  Eigen::MatrixXd coarse = iterated_covariance_at_resolution(a.matrix, r, t, 8, drop_boundary);
  for (std::size_t panels = 16; panels <= 512; panels *= 2) {
    Eigen::MatrixXd fine = iterated_covariance_at_resolution(a.matrix, r, t, panels, drop_boundary);
    const double change = (fine - coarse).norm() + tail;
    if (change <= tol) return fine;
    coarse = std::move(fine);
  }
  throw QuadratureFailure(format_message(fn, "panel doubling did not converge", tol));
}

}  // namespace

// ── sample_driver ─────────────────────────────────────────────────────────────

PathEnsemble sample_driver(const DriverSpec& spec, std::size_t n, std::uint64_t seed) {
  validate_grid("sample_driver", spec.grid);
  if (n < 1)
    throw std::invalid_argument("sample_driver: need at least one path");

  const std::size_t length = spec.grid.count;
  const std::size_t increments = length - 1;
  const double h = spec.grid.step;

  PathEnsemble ensemble;
  ensemble.grid = spec.grid;
  ensemble.seed = seed;
  ensemble.kind = spec.kind;
  ensemble.paths.assign(n, Eigen::MatrixXd());

  switch (spec.kind) {
    case DriverKind::brownian: {
      const double scale = std::sqrt(h);
      cutofflab::detail::parallel_for(n, [&](std::size_t j) {
        Rng rng = stream_for(seed, kDriverTag, j);
        Eigen::MatrixXd path(length, 1);
        path(0, 0) = 0.0;
        for (std::size_t k = 1; k < length; ++k)
          path(static_cast<Eigen::Index>(k), 0) =
              path(static_cast<Eigen::Index>(k - 1), 0) + scale * rng.normal();
        ensemble.paths[j] = std::move(path);
      });
      break;
    }
    case DriverKind::fractional_brownian: {
      if (!(spec.hurst > 0.0) || !(spec.hurst < 1.0))
        throw InadmissibleRange(
            format_message("sample_driver", "hurst must lie in (0,1)", spec.hurst));
      const detail::FbmIncrementSampler sampler(spec.hurst, h, increments);
      cutofflab::detail::parallel_for(n, [&](std::size_t j) {
        Rng rng = stream_for(seed, kDriverTag, j);
        Eigen::VectorXd steps;
        sampler.draw(rng, steps);
        Eigen::MatrixXd path(length, 1);
        path(0, 0) = 0.0;
        for (std::size_t k = 1; k < length; ++k)
          path(static_cast<Eigen::Index>(k), 0) =
              path(static_cast<Eigen::Index>(k - 1), 0) +
              steps[static_cast<Eigen::Index>(k - 1)];
        ensemble.paths[j] = std::move(path);
      });
      break;
    }
    case DriverKind::stable: {
      if (!(spec.alpha > 1.0) || !(spec.alpha < 2.0))
        throw InadmissibleRange(
            format_message("sample_driver", "alpha must lie in (1,2)", spec.alpha));
      const double scale = std::pow(h, 1.0 / spec.alpha);
      cutofflab::detail::parallel_for(n, [&](std::size_t j) {
        Rng rng = stream_for(seed, kDriverTag, j);
        Eigen::MatrixXd path(length, 1);
        path(0, 0) = 0.0;
        for (std::size_t k = 1; k < length; ++k)
          path(static_cast<Eigen::Index>(k), 0) =
              path(static_cast<Eigen::Index>(k - 1), 0) + scale * rng.stable(spec.alpha);
        ensemble.paths[j] = std::move(path);
      });
      break;
    }
    case DriverKind::stationary_gaussian: {
      if (!spec.covariance)
        throw MissingParameter("sample_driver: stationary driver needs a covariance function");
      Eigen::MatrixXd gram(length, length);
      std::vector<double> r(length);
      for (std::size_t l = 0; l < length; ++l)
        r[l] = spec.covariance(h * static_cast<double>(l));
      for (std::size_t i = 0; i < length; ++i)
        for (std::size_t j = 0; j <= i; ++j)
          gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r[i - j];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(gram);
      const double max_eig = eigen.eigenvalues().maxCoeff();
      const double min_eig = eigen.eigenvalues().minCoeff();
      if (min_eig < -kGramEigenvalueTol * std::max(1.0, max_eig))
        throw EmbeddingFailure(
            format_message("sample_driver", "covariance kernel not PSD on the grid", min_eig));
      const Eigen::MatrixXd factor =
          eigen.eigenvectors() *
          eigen.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
      cutofflab::detail::parallel_for(n, [&](std::size_t j) {
        Rng rng = stream_for(seed, kDriverTag, j);
        Eigen::VectorXd normals(static_cast<Eigen::Index>(length));
        for (Eigen::Index i = 0; i < normals.size(); ++i) normals[i] = rng.normal();
        Eigen::MatrixXd path(length, 1);
        path.col(0).noalias() = factor * normals;
        ensemble.paths[j] = std::move(path);
      });
      break;
    }
  }
  return ensemble;
}

// ── stochastic_convolution ────────────────────────────────────────────────────

namespace {

// Trapezoid recursion along one path; writes S rows into `out`.
void convolve_continuous(const Eigen::MatrixXd& exp_step, const Eigen::MatrixXd& half_new,
                         const Eigen::MatrixXd& half_old, const Eigen::MatrixXd& driver,
                         Eigen::MatrixXd& out) {
  const Eigen::Index length = driver.rows();
  const Eigen::Index m = driver.cols();
  Eigen::VectorXd integral = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd start = driver.row(0).transpose();
  Eigen::VectorXd next(m);
  out.row(0).setZero();
  for (Eigen::Index k = 1; k < length; ++k) {
    next.noalias() = exp_step * integral;
    next.noalias() += half_old * driver.row(k - 1).transpose();
    next.noalias() += half_new * driver.row(k).transpose();
    integral.swap(next);
    start.applyOnTheLeft(exp_step);
    out.row(k) = driver.row(k) - start.transpose() - integral.transpose();
  }
}

double scalar_exp_entry(const Eigen::MatrixXd& m) { return m(0, 0); }

// Scalar drivers dominate the Monte Carlo budget; plain doubles avoid the
// dynamic-matrix overhead in the per-step recursion.
void convolve_continuous_scalar(double exp_step, double half_new, double half_old,
                                const Eigen::MatrixXd& driver, Eigen::MatrixXd& out) {
  const Eigen::Index length = driver.rows();
  double integral = 0.0;
  double start = driver(0, 0);
  out(0, 0) = 0.0;
  for (Eigen::Index k = 1; k < length; ++k) {
    integral = exp_step * integral + half_old * driver(k - 1, 0) + half_new * driver(k, 0);
    start *= exp_step;
    out(k, 0) = driver(k, 0) - start - integral;
  }
}

}  // namespace

PathEnsemble stochastic_convolution(const spectral::StableMatrix& a,
                                    const PathEnsemble& driver) {
  const char* fn = "stochastic_convolution";
  validate_grid(fn, driver.grid);
  if (driver.count() == 0)
    throw std::invalid_argument("stochastic_convolution: empty driver ensemble");
  const Eigen::Index m = a.dim();
  if (driver.dimension() != m)
    throw std::invalid_argument(format_message(
        fn, "driver dimension does not match the drift", static_cast<double>(driver.dimension())));

  const double h = driver.grid.step;
  const std::size_t length = driver.grid.count;
  const std::size_t n = driver.count();
  const Eigen::MatrixXd exp_step = (-a.matrix * h).exp();

  PathEnsemble out;
  out.grid = driver.grid;
  out.seed = driver.seed;
  out.kind = driver.kind;
  out.paths.assign(n, Eigen::MatrixXd());

  if (is_jump_kind(driver.kind)) {
    // Increments arrive at grid times; the convolution is a plain summation.
    cutofflab::detail::parallel_for(n, [&](std::size_t j) {
      const Eigen::MatrixXd& d = driver.paths[j];
      Eigen::MatrixXd s(length, m);
      s.row(0).setZero();
      Eigen::VectorXd cur = Eigen::VectorXd::Zero(m);
      for (std::size_t k = 1; k < length; ++k) {
        cur.applyOnTheLeft(exp_step);
        cur.noalias() += (d.row(k) - d.row(k - 1)).transpose();
        s.row(k) = cur.transpose();
      }
      out.paths[j] = std::move(s);
    });
    return out;
  }

  const Eigen::MatrixXd half_new = 0.5 * h * a.matrix;
  const Eigen::MatrixXd half_old = exp_step * half_new;
  const bool scalar = m == 1;

  cutofflab::detail::parallel_for(n, [&](std::size_t j) {
    const Eigen::MatrixXd& d = driver.paths[j];
    if (d.rows() != static_cast<Eigen::Index>(length) || d.cols() != m)
      throw std::invalid_argument("stochastic_convolution: ragged driver ensemble");
    Eigen::MatrixXd s(length, m);
    if (scalar)
      convolve_continuous_scalar(scalar_exp_entry(exp_step), scalar_exp_entry(half_new),
                                 scalar_exp_entry(half_old), d, s);
    else
      convolve_continuous(exp_step, half_new, half_old, d, s);
    out.paths[j] = std::move(s);
  });

  // Error estimate against the exact convolution of the piecewise-linear
  // driver reconstruction: on one step,
  //     ∫_0^h Λe^{−Λ(h−u)}(D_k + (u/h)ΔD)du = (I−E)D_k + (I − (Λh)^{−1}(I−E))ΔD,
  // so the target the trapezoid rule approximates on the sampled data is
  // itself available in closed form, and the comparison isolates the kernel
  // resolution error from the roughness of the driver path.
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd level = eye - exp_step;
  const Eigen::MatrixXd slope = eye - a.matrix.partialPivLu().solve(level) / h;
  const Eigen::MatrixXd exact_old = level - slope;
  const std::size_t stride = std::max<std::size_t>(1, n / 32);
  double worst = 0.0;
  Eigen::MatrixXd exact(length, m);
  for (std::size_t j = 0; j < n; j += stride) {
    const Eigen::MatrixXd& d = driver.paths[j];
    if (scalar)
      convolve_continuous_scalar(scalar_exp_entry(exp_step), scalar_exp_entry(slope),
                                 scalar_exp_entry(exact_old), d, exact);
    else
      convolve_continuous(exp_step, slope, exact_old, d, exact);
    const double scale = exact.cwiseAbs().maxCoeff();
    if (scale < 1e-30) continue;
    worst = std::max(worst, (out.paths[j] - exact).cwiseAbs().maxCoeff() / scale);
  }
  if (worst > kConvolutionTol)
    throw GridTooCoarse(
        format_message(fn, "relative quadrature error estimate above 1e-4", worst));
  return out;
}

// ── iterated Ornstein–Uhlenbeck covariances ───────────────────────────────────

Eigen::MatrixXd iterated_ou_limit_covariance(
    const spectral::StableMatrix& a,
    const std::function<Eigen::MatrixXd(double)>& driver_covariance, double horizon,
    double tol) {
  if (!driver_covariance)
    throw MissingParameter("iterated_ou_limit_covariance: covariance function required");
  return iterated_covariance_adaptive("iterated_ou_limit_covariance", a,
                                      driver_covariance, horizon, tol, true);
}

Eigen::MatrixXd iterated_ou_covariance(
    const spectral::StableMatrix& a,
    const std::function<Eigen::MatrixXd(double)>& driver_covariance, double t,
    double tol) {
  if (!driver_covariance)
    throw MissingParameter("iterated_ou_covariance: covariance function required");
  // At finite t the tail gate does not apply; R_D(t) enters the boundary
  // terms instead, so only quadrature convergence is enforced.
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument(
        format_message("iterated_ou_covariance", "time must be positive", t));
  if (!(tol > 0.0))
    throw std::invalid_argument(
        format_message("iterated_ou_covariance", "tolerance must be positive", tol));
  Eigen::MatrixXd coarse =
      iterated_covariance_at_resolution(a.matrix, driver_covariance, t, 8, false);
  for (std::size_t panels = 16; panels <= 512; panels *= 2) {
    Eigen::MatrixXd fine =
        iterated_covariance_at_resolution(a.matrix, driver_covariance, t, panels, false);
    if ((fine - coarse).norm() <= tol) return fine;
    coarse = std::move(fine);
  }
  throw QuadratureFailure(
      format_message("iterated_ou_covariance", "panel doubling did not converge", tol));
}

// ── inhomogeneous_variance ────────────────────────────────────────────────────

VarianceWithLimit inhomogeneous_variance(double lambda,
                                         const std::function<double(double)>& tau,
                                         double tau_limit, double t) {
  const char* fn = "inhomogeneous_variance";
  if (!(lambda > 0.0))
    throw std::invalid_argument(format_message(fn, "lambda must be positive", lambda));
  if (!tau) throw MissingParameter("inhomogeneous_variance: tau required");
  if (!(tau_limit > 0.0))
    throw std::invalid_argument(
        format_message(fn, "tau limit must be positive", tau_limit));
  if (!(t >= 0.0) || !std::isfinite(t))
    throw std::invalid_argument(format_message(fn, "time must be finite and >= 0", t));

  VarianceWithLimit result;
  result.limit = tau_limit * tau_limit / (2.0 * lambda);
  if (t == 0.0) return result;

  // e^{−2λt}∫_0^t e^{2λs}τ(s)²ds = ∫_0^t e^{−2λu}τ(t−u)²du, overflow-free.
  boost::math::quadrature::tanh_sinh<double> rule;
  double rel_err = 0.0;
  double l1 = 0.0;
  const auto integrand = [&](double u) {
    const double amp = tau(t - u);
    return std::exp(-2.0 * lambda * u) * amp * amp;
  };
  result.value = rule.integrate(integrand, 0.0, t, 1e-12, &rel_err, &l1);
  if (rel_err * std::max(l1, std::abs(result.value)) >
      1e-10 * std::max(1.0, std::abs(result.value)))
    throw QuadratureFailure(
        format_message(fn, "quadrature error estimate above tolerance", rel_err));
  return result;
}

// ── integrated_ou_law ─────────────────────────────────────────────────────────

metrics::LawDescriptor integrated_ou_law(double lambda, double epsilon, double x,
                                         double y, double t, IntegratedDriverKind kind,
                                         double alpha, double c_alpha) {
  const char* fn = "integrated_ou_law";
  if (!(lambda > 0.0))
    throw std::invalid_argument(format_message(fn, "lambda must be positive", lambda));
  if (!(epsilon > 0.0))
    throw std::invalid_argument(format_message(fn, "epsilon must be positive", epsilon));
  if (!(t > 0.0))
    throw std::invalid_argument(format_message(fn, "time must be positive", t));
  (void)y;  // Z^ε_t is centered at y + x/λ, so y cancels from its law.

  if (kind == IntegratedDriverKind::gaussian) {
    metrics::GaussianLaw law;
    law.mean.resize(1);
    law.covariance.resize(1, 1);
    if (std::isinf(t)) {
      law.mean[0] = 0.0;
      law.covariance(0, 0) = epsilon * epsilon / (lambda * lambda);
      return law;
    }
    law.mean[0] = -(x / lambda) * std::exp(-lambda * t) / std::sqrt(t);
    const double lt = lambda * t;
    const double shape = 1.0 - (2.0 / lt) * (1.0 - std::exp(-lt)) +
                         (1.0 / (2.0 * lt)) * (1.0 - std::exp(-2.0 * lt));
    law.covariance(0, 0) = (epsilon * epsilon) / (lambda * lambda) * shape;
    return law;
  }

  if (!(alpha > 1.0) || !(alpha < 2.0))
    throw InadmissibleRange(format_message(fn, "alpha must lie in (1,2)", alpha));
  if (!(c_alpha > 0.0))
    throw std::invalid_argument(format_message(fn, "c_alpha must be positive", c_alpha));

  metrics::StableLawDescriptor law;
  law.alpha = alpha;
  const double base = std::pow(epsilon, alpha) * c_alpha / std::pow(lambda, alpha);
  if (std::isinf(t)) {
    law.scale_c = base;
    law.location = 0.0;
    return law;
  }
  boost::math::quadrature::tanh_sinh<double> rule;
  const double shape = rule.integrate(
      [&](double r) { return std::pow(1.0 - std::exp(-lambda * r), alpha); }, 0.0, t);
  law.scale_c = base * shape / t;
  law.location = -(x / lambda) * std::exp(-lambda * t) / std::pow(t, 1.0 / alpha);
  return law;
}

// ── average_ensemble ──────────────────────────────────────────────────────────

PathEnsemble average_ensemble(double lambda, double hurst, double x,
                              std::size_t n_components, const TimeGrid& grid,
                              std::size_t n_replicas, std::uint64_t seed,
                              AveragingMode mode) {
  const char* fn = "average_ensemble";
  validate_grid(fn, grid);
  if (n_components < 1)
    throw std::invalid_argument("average_ensemble: need at least one component");
  if (n_replicas < 1)
    throw std::invalid_argument("average_ensemble: need at least one replica");

  const std::size_t length = grid.count;
  const double h = grid.step;

  // Gram matrix of S_t = U_t − e^{−λt}U_0 on the grid (exact in law).
  std::vector<double> r(length);
  for (std::size_t l = 0; l < length; ++l)
    r[l] = fou_stationary_covariance(lambda, hurst, h * static_cast<double>(l));
  std::vector<double> decay(length);
  for (std::size_t k = 0; k < length; ++k) decay[k] = std::exp(-lambda * grid.time(k));
  Eigen::MatrixXd gram(length, length);
  for (std::size_t i = 0; i < length; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double value =
          r[i - j] - decay[i] * r[j] - decay[j] * r[i] + decay[i] * decay[j] * r[0];
      gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
      gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(gram);
  const double max_eig = eigen.eigenvalues().maxCoeff();
  if (eigen.eigenvalues().minCoeff() < -1e-8 * std::max(1.0, max_eig))
    throw EmbeddingFailure(format_message(fn, "noise Gram matrix not PSD",
                                          eigen.eigenvalues().minCoeff()));
  const Eigen::MatrixXd factor =
      eigen.eigenvectors() * eigen.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  const bool direct = mode == AveragingMode::direct ||
                      (mode == AveragingMode::automatic && n_components <= 1024);
  const double n_comp = static_cast<double>(n_components);

  PathEnsemble ensemble;
  ensemble.grid = grid;
  ensemble.seed = seed;
  ensemble.kind = DriverKind::stationary_gaussian;
  ensemble.paths.assign(n_replicas, Eigen::MatrixXd());

  cutofflab::detail::parallel_for(n_replicas, [&](std::size_t i) {
    Eigen::VectorXd noise = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(length));
    Eigen::VectorXd normals(static_cast<Eigen::Index>(length));
    const std::size_t draws = direct ? n_components : 1;
    for (std::size_t j = 0; j < draws; ++j) {
      Rng rng = stream_for(seed, kAverageTag, i, j);
      for (Eigen::Index k = 0; k < normals.size(); ++k) normals[k] = rng.normal();
      noise.noalias() += factor * normals;
    }
    noise *= direct ? 1.0 / n_comp : 1.0 / std::sqrt(n_comp);
    Eigen::MatrixXd path(length, 1);
    for (std::size_t k = 0; k < length; ++k)
      path(static_cast<Eigen::Index>(k), 0) = decay[k] * x + noise[static_cast<Eigen::Index>(k)];
    ensemble.paths[i] = std::move(path);
  });
  return ensemble;
}

}  // namespace cutofflab::simulate
