#include "cutofflab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fftw3.h>

#include "cutofflab/assignment.hpp"
#include "cutofflab/errors.hpp"
#include "fftw_guard.hpp"

namespace cutofflab::metrics {

namespace {

constexpr double matrix_equality_tol = 1e-12;
constexpr double cf_tail_tol = 1e-12;
constexpr double clip_mass_tol = 1e-4;
constexpr double renorm_tol = 1e-6;
constexpr Eigen::Index assignment_limit = 2048;

std::string format_message(const char* fn, const char* what, double value) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s: %s (%.6g)", fn, what, value);
  return buf;
}

void check_gaussian(const char* fn, const GaussianLaw& g) {
  const Eigen::Index m = g.mean.size();
  if (g.covariance.rows() != m || g.covariance.cols() != m)
    throw std::invalid_argument(std::string(fn) +
                                ": covariance shape does not match mean");
  const double scale = std::max(1.0, g.covariance.norm());
  if ((g.covariance - g.covariance.transpose()).norm() > 1e-9 * scale)
    throw std::invalid_argument(std::string(fn) + ": covariance not symmetric");
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// TV between univariate Gaussians; handles degenerate (zero-variance) laws
// and the general unequal-variance case through the two density crossings.
double tv_univariate(double m1, double var1, double m2, double var2) {
  const double s1 = std::sqrt(std::max(var1, 0.0));
  const double s2 = std::sqrt(std::max(var2, 0.0));
  const bool deg1 = !(s1 > 0.0), deg2 = !(s2 > 0.0);
  const double mean_scale = 1.0 + std::max(std::abs(m1), std::abs(m2));
  if (deg1 && deg2) return std::abs(m1 - m2) <= 1e-12 * mean_scale ? 0.0 : 1.0;
  if (deg1 || deg2) return 1.0;  // point mass against a continuous law

  if (std::abs(s1 - s2) <= 1e-12 * std::max(s1, s2))
    return 2.0 * normal_cdf(std::abs(m1 - m2) / (s1 + s2)) - 1.0;

  // Crossing points of the two densities: roots of Ax² + Bx + C = 0.
  const double a = 1.0 / (s1 * s1) - 1.0 / (s2 * s2);
  const double b = -2.0 * (m1 / (s1 * s1) - m2 / (s2 * s2));
  const double c = m1 * m1 / (s1 * s1) - m2 * m2 / (s2 * s2) -
                   2.0 * std::log(s2 / s1);
  const double disc = std::max(b * b - 4.0 * a * c, 0.0);
  const double sqrt_disc = std::sqrt(disc);
  const double q = b >= 0.0 ? -(b + sqrt_disc) / 2.0 : -(b - sqrt_disc) / 2.0;
  double x1, x2;
  if (q != 0.0) {
    x1 = q / a;
    x2 = c / q;
  } else {  // b == 0 and tangent discriminant: symmetric double root
    x1 = x2 = 0.0;
  }
  const double lo = std::min(x1, x2), hi = std::max(x1, x2);
  const double mid1 = normal_cdf((hi - m1) / s1) - normal_cdf((lo - m1) / s1);
  const double mid2 = normal_cdf((hi - m2) / s2) - normal_cdf((lo - m2) / s2);
  return std::min(std::abs(mid1 - mid2), 1.0);
}

// TV between equal-covariance Gaussians, 2Φ(‖C^{−1/2}Δm‖/2)−1, with
// singular directions handled through the eigendecomposition: any mean
// displacement outside the range of C separates the laws completely.
double tv_equal_covariance(const Eigen::MatrixXd& cov, const Eigen::VectorXd& dm) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      (cov + cov.transpose()) / 2.0);
  const Eigen::VectorXd values = eig.eigenvalues();
  const double max_eig = std::max(values.maxCoeff(), 0.0);
  const double null_tol = 1e-12 * std::max(max_eig, 1.0);
  double quad = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double proj = eig.eigenvectors().col(i).dot(dm);
    if (values(i) <= null_tol) {
      if (std::abs(proj) > 1e-9 * (1.0 + dm.norm())) return 1.0;
    } else {
      quad += proj * proj / values(i);
    }
  }
  return 2.0 * normal_cdf(std::sqrt(quad) / 2.0) - 1.0;
}

double trapezoid(const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
    sum += 0.5 * (f(i) + f(i + 1)) * (x(i + 1) - x(i));
  return sum;
}

void check_stable(const char* fn, const StableLawDescriptor& law) {
  if (!(law.alpha > 1.0) || !(law.alpha <= 2.0))
    throw std::invalid_argument(
        format_message(fn, "stability index must lie in (1, 2]", law.alpha));
  if (!(law.scale_c > 0.0))
    throw std::invalid_argument(
        format_message(fn, "scale must be positive", law.scale_c));
}

}  // namespace

// ── Shared special functions ─────────────────────────────────────────────────

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_absolute_moment(double p) {
  return std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) /
         std::sqrt(std::numbers::pi);
}

// ── tv_gaussian ──────────────────────────────────────────────────────────────

double tv_gaussian(const GaussianLaw& g1, const GaussianLaw& g2) {
  check_gaussian("tv_gaussian", g1);
  check_gaussian("tv_gaussian", g2);
  if (g1.dim() != g2.dim())
    throw std::invalid_argument("tv_gaussian: dimension mismatch");

  if (g1.dim() == 1)
    return tv_univariate(g1.mean(0), g1.covariance(0, 0), g2.mean(0),
                         g2.covariance(0, 0));

  const double cov_scale =
      std::max({1.0, g1.covariance.norm(), g2.covariance.norm()});
  if ((g1.covariance - g2.covariance).norm() > matrix_equality_tol * cov_scale)
    throw UnsupportedCase(
        "tv_gaussian: multivariate laws with distinct covariances are not "
        "supported exactly; use densities or Monte Carlo");
  const Eigen::MatrixXd common = (g1.covariance + g2.covariance) / 2.0;
  return tv_equal_covariance(common, g1.mean - g2.mean);
}

// ── tv_from_densities ────────────────────────────────────────────────────────

TvDensityEstimate tv_from_densities(const DensityGrid& f1, const DensityGrid& f2) {
  if (f1.x.size() != f1.f.size() || f2.x.size() != f2.f.size())
    throw std::invalid_argument("tv_from_densities: grid and value sizes differ");
  if (f1.x.size() < 2)
    throw std::invalid_argument("tv_from_densities: grid needs at least 2 points");
  if (f1.x.size() != f2.x.size())
    throw GridMismatch("tv_from_densities: grids have different lengths");
  const double span = std::max(1.0, f1.x(f1.x.size() - 1) - f1.x(0));
  if ((f1.x - f2.x).cwiseAbs().maxCoeff() > 1e-9 * span)
    throw GridMismatch("tv_from_densities: abscissae differ between grids");
  if (f1.f.minCoeff() < -1e-12 || f2.f.minCoeff() < -1e-12)
    throw std::invalid_argument("tv_from_densities: densities must be nonnegative");

  const double mass1 = trapezoid(f1.x, f1.f);
  const double mass2 = trapezoid(f2.x, f2.f);
  if (std::abs(mass1 - 1.0) > renorm_tol)
    throw NotNormalized(
        format_message("tv_from_densities", "first density integrates to", mass1));
  if (std::abs(mass2 - 1.0) > renorm_tol)
    throw NotNormalized(
        format_message("tv_from_densities", "second density integrates to", mass2));

  TvDensityEstimate out;
  out.value = std::min(0.5 * trapezoid(f1.x, (f1.f - f2.f).cwiseAbs().eval()), 1.0);
  out.tail_mass = std::abs(1.0 - mass1) + std::abs(1.0 - mass2);
  return out;
}

// ── density_from_cf ──────────────────────────────────────────────────────────

DensityGrid density_from_cf(const StableLawDescriptor& law,
                            const Eigen::VectorXd& grid) {
  check_stable("density_from_cf", law);
  const Eigen::Index n = grid.size();
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument(
        "density_from_cf: grid must hold an odd number (>= 3) of points");
  const double h = grid(1) - grid(0);
  if (!(h > 0.0))
    throw std::invalid_argument("density_from_cf: grid must be increasing");
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    if (std::abs(grid(i + 1) - grid(i) - h) > 1e-9 * h)
      throw std::invalid_argument("density_from_cf: grid must be uniform");
  const Eigen::Index centre = (n - 1) / 2;
  if (std::abs(grid(centre)) > 1e-9 * h)
    throw std::invalid_argument("density_from_cf: grid must be symmetric about 0");

  // Frequency cutoff π/h: the CF mass beyond it aliases into the result.
  const double z_max = std::numbers::pi / h;
  const double cf_tail = std::exp(-law.scale_c * std::pow(z_max, law.alpha));
  if (cf_tail > cf_tail_tol)
    throw NyquistViolation(format_message(
        "density_from_cf", "characteristic function at the grid cutoff still",
        cf_tail));

  std::size_t fft_n = 4096;
  while (fft_n < static_cast<std::size_t>(2 * n)) fft_n *= 2;
  const double dz = 2.0 * std::numbers::pi / (static_cast<double>(fft_n) * h);

  std::vector<std::complex<double>> buffer(fft_n);
  for (std::size_t k = 0; k < fft_n; ++k) {
    const double z = (static_cast<double>(k) - static_cast<double>(fft_n) / 2.0) * dz;
    const double mag = -law.scale_c * std::pow(std::abs(z), law.alpha);
    buffer[k] = std::polar(std::exp(mag), law.location * z);
  }
  {
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      plan = fftw_plan_dft_1d(static_cast<int>(fft_n),
                              reinterpret_cast<fftw_complex*>(buffer.data()),
                              reinterpret_cast<fftw_complex*>(buffer.data()),
                              FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }

  // f(m·h) = (Δz/2π)·(−1)^m·Re(DFT[ψ]_m), indices wrapped mod the FFT size.
  DensityGrid out;
  out.x = grid;
  out.f.resize(n);
  const double normalizer = dz / (2.0 * std::numbers::pi);
  for (Eigen::Index j = 0; j < n; ++j) {
    const long long m = static_cast<long long>(j - centre);
    const std::size_t idx =
        static_cast<std::size_t>((m % static_cast<long long>(fft_n) +
                                  static_cast<long long>(fft_n)) %
                                 static_cast<long long>(fft_n));
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    out.f(j) = normalizer * sign * buffer[idx].real();
  }

  double clipped = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (out.f(j) < 0.0) {
      clipped += -out.f(j) * h;
      out.f(j) = 0.0;
    }
  }
  if (clipped > clip_mass_tol)
    throw NegativeMass(
        format_message("density_from_cf", "clipped negative mass", clipped));

  const double mass = trapezoid(out.x, out.f);
  if (std::abs(mass - 1.0) > renorm_tol)
    throw NotNormalized(format_message(
        "density_from_cf", "grid too short for the tails, mass", mass));
  out.f /= mass;
  return out;
}

// ── wp_exact ─────────────────────────────────────────────────────────────────

double wp_exact(const LawDescriptor& law, const Eigen::VectorXd& shift, double p) {
  if (!(p >= 1.0))
    throw std::invalid_argument(
        format_message("wp_exact", "order p must be at least 1", p));
  if (const auto* stable = std::get_if<StableLawDescriptor>(&law)) {
    check_stable("wp_exact", *stable);
    if (p >= stable->alpha)
      throw MomentViolation(format_message(
          "wp_exact", "stable law has no finite moment of order", p));
  } else if (const auto* gaussian = std::get_if<GaussianLaw>(&law)) {
    check_gaussian("wp_exact", *gaussian);
  } else if (const auto* empirical = std::get_if<EmpiricalLaw>(&law)) {
    if (empirical->count() < 2)
      throw std::invalid_argument("wp_exact: empirical law needs >= 2 samples");
  }
  return shift.norm();
}

// ── wp_empirical ─────────────────────────────────────────────────────────────

double wp_empirical(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2, double p) {
  if (!(p >= 1.0))
    throw std::invalid_argument(
        format_message("wp_empirical", "order p must be at least 1", p));
  if (s1.rows() != s2.rows())
    throw UnequalCounts("wp_empirical: sample counts differ");
  if (s1.cols() != s2.cols())
    throw std::invalid_argument("wp_empirical: sample dimensions differ");
  const Eigen::Index n = s1.rows();
  if (n < 2)
    throw std::invalid_argument("wp_empirical: need at least 2 samples");

  if (s1.cols() == 1) {
    std::vector<double> a(s1.col(0).data(), s1.col(0).data() + n);
    std::vector<double> b(s2.col(0).data(), s2.col(0).data() + n);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      acc += std::pow(std::abs(a[i] - b[i]), p);
    return std::pow(acc / static_cast<double>(n), 1.0 / p);
  }

  // Pairs differing by one constant vector: the identity coupling is
  // optimal (the mean displacement lower-bounds every coupling).
  const Eigen::MatrixXd diff = s2 - s1;
  const Eigen::RowVectorXd mean_shift = diff.colwise().mean();
  const double spread =
      (diff.rowwise() - mean_shift).rowwise().norm().maxCoeff();
  if (spread <= 1e-9 * (1.0 + mean_shift.norm())) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      acc += std::pow(diff.row(i).norm(), p);
    return std::pow(acc / static_cast<double>(n), 1.0 / p);
  }

  if (n > assignment_limit)
    throw TooLargeForExact(format_message(
        "wp_empirical", "multivariate assignment capped at 2048 samples, got",
        static_cast<double>(n)));

  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cost(i, j) = std::pow((s1.row(i) - s2.row(j)).norm(), p);
  double total = 0.0;
  detail::solve_assignment(cost, total);
  return std::pow(total / static_cast<double>(n), 1.0 / p);
}

// ── wp_gaussian_univariate ───────────────────────────────────────────────────

double wp_gaussian_univariate(double m1, double s1, double m2, double s2,
                              double p) {
  if (!(p >= 1.0))
    throw std::invalid_argument(
        format_message("wp_gaussian_univariate", "order p must be at least 1", p));
  if (s1 < 0.0 || s2 < 0.0)
    throw std::invalid_argument(
        "wp_gaussian_univariate: standard deviations must be nonnegative");
  const double delta = m2 - m1;
  const double a = std::abs(s2 - s1);
  if (a == 0.0) return std::abs(delta);
  if (delta == 0.0) return a * std::pow(normal_absolute_moment(p), 1.0 / p);

  const double z = delta / a;
  const double phi = normal_pdf(z);
  const double two_cdf = 2.0 * normal_cdf(z) - 1.0;
  if (p == 1.0) return std::abs(delta * two_cdf + 2.0 * a * phi);
  if (p == 2.0) return std::sqrt(delta * delta + a * a);
  if (p == 3.0) {
    const double moment = (delta * delta * delta + 3.0 * delta * a * a) * two_cdf +
                          2.0 * a * (delta * delta + 2.0 * a * a) * phi;
    return std::cbrt(std::abs(moment));
  }

  // E|δ + aG|^p split at the kink g = −δ/a.
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double kink = -delta / a;
  const double lo = std::min(kink, -45.0);
  const double hi = std::max(kink, 45.0);
  auto integrand = [&](double g) {
    return std::pow(std::abs(delta + a * g), p) * normal_pdf(g);
  };
  const double moment =
      integrator.integrate(integrand, lo, kink) +
      integrator.integrate(integrand, kink, hi);
  return std::pow(moment, 1.0 / p);
}

// ── profile_tv / profile_wp ──────────────────────────────────────────────────

double profile_tv(double lambda, double w, double x, double r0, double r) {
  if (!(lambda > 0.0) || !(w > 0.0))
    throw std::invalid_argument("profile_tv: rate and window must be positive");
  if (!(r0 > 0.0))
    throw SingularLimitLaw(
        format_message("profile_tv", "limit variance must be positive", r0));
  const double arg = std::exp(-lambda * r * w) * std::abs(x) / (2.0 * std::sqrt(r0));
  return 2.0 * normal_cdf(arg) - 1.0;
}

double profile_tv(double lambda, int ell, double w, const Eigen::VectorXd& v,
                  const GaussianLaw& z, double r) {
  if (!(lambda > 0.0) || !(w > 0.0) || ell < 1)
    throw std::invalid_argument("profile_tv: invalid rate, window, or block size");
  check_gaussian("profile_tv", z);
  if (z.dim() != v.size())
    throw std::invalid_argument("profile_tv: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      (z.covariance + z.covariance.transpose()) / 2.0);
  const double max_eig = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(max_eig, 1.0))
    throw SingularLimitLaw("profile_tv: limit covariance is singular");

  const double scale =
      std::pow(lambda, 1.0 - ell) * std::exp(-lambda * r * w);
  GaussianLaw shifted{z.mean + scale * v, z.covariance};
  return tv_gaussian(shifted, z);
}

double profile_wp(double lambda, int ell, double w, const Eigen::VectorXd& v,
                  double r, double p) {
  if (!(lambda > 0.0) || !(w > 0.0) || ell < 1)
    throw std::invalid_argument("profile_wp: invalid rate, window, or block size");
  if (!(p >= 1.0))
    throw std::invalid_argument("profile_wp: order p must be at least 1");
  return std::pow(lambda, 1.0 - ell) * std::exp(-lambda * r * w) * v.norm();
}

}  // namespace cutofflab::metrics
