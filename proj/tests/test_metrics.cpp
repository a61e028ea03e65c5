#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "cutofflab/assignment.hpp"
#include "cutofflab/errors.hpp"
#include "cutofflab/metrics.hpp"
#include "cutofflab/rng.hpp"

using namespace cutofflab;
using namespace cutofflab::metrics;

namespace {

GaussianLaw normal1(double mean, double variance) {
  GaussianLaw g;
  g.mean = Eigen::VectorXd::Constant(1, mean);
  g.covariance = Eigen::MatrixXd::Constant(1, 1, variance);
  return g;
}

GaussianLaw normal2(double m1, double m2, const Eigen::Matrix2d& cov) {
  GaussianLaw g;
  g.mean = Eigen::VectorXd(2);
  g.mean << m1, m2;
  g.covariance = cov;
  return g;
}

double gauss_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

Eigen::VectorXd uniform_grid(double lo, double hi, double step) {
  const auto n = static_cast<Eigen::Index>(std::llround((hi - lo) / step)) + 1;
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = lo + static_cast<double>(i) * step;
  return x;
}

}  // namespace

// ── tv_gaussian ──────────────────────────────────────────────────────────────

TEST_CASE("total variation vanishes for identical Gaussians") {
  CHECK(tv_gaussian(normal1(0, 1), normal1(0, 1)) == 0.0);
  Eigen::Matrix2d cov;
  cov << 2, 0.5, 0.5, 1;
  CHECK(tv_gaussian(normal2(1, -1, cov), normal2(1, -1, cov)) == 0.0);
}

TEST_CASE("total variation under a unit mean shift matches the erf formula") {
  CHECK(tv_gaussian(normal1(1, 1), normal1(0, 1)) ==
        doctest::Approx(0.38292492254802621).epsilon(1e-12));
  CHECK(tv_gaussian(normal1(3, 4), normal1(0, 4)) ==
        doctest::Approx(0.5467452952462636).epsilon(1e-12));
}

TEST_CASE("total variation between unequal-variance Gaussians uses the crossings") {
  CHECK(tv_gaussian(normal1(0, 1), normal1(0, 4)) ==
        doctest::Approx(0.32267456883476866).epsilon(1e-8));
  CHECK(tv_gaussian(normal1(0, 1), normal1(1, 2.25)) ==
        doctest::Approx(0.34612308398976227).epsilon(1e-8));
  // Symmetric in its arguments.
  CHECK(tv_gaussian(normal1(1, 2.25), normal1(0, 1)) ==
        doctest::Approx(0.34612308398976227).epsilon(1e-8));
}

TEST_CASE("multivariate equal-covariance total variation whitens the shift") {
  CHECK(tv_gaussian(normal2(1, 0, Eigen::Matrix2d::Identity()),
                    normal2(0, 0, Eigen::Matrix2d::Identity())) ==
        doctest::Approx(0.38292492254802621).epsilon(1e-12));
  Eigen::Matrix2d cov;
  cov << 4, 0, 0, 1;
  CHECK(tv_gaussian(normal2(2, 0, cov), normal2(0, 0, cov)) ==
        doctest::Approx(0.38292492254802621).epsilon(1e-12));
}

TEST_CASE("multivariate unequal covariances are refused") {
  Eigen::Matrix2d c2 = Eigen::Matrix2d::Identity() * 2.0;
  CHECK_THROWS_AS(tv_gaussian(normal2(0, 0, Eigen::Matrix2d::Identity()),
                              normal2(0, 0, c2)),
                  UnsupportedCase);
}

TEST_CASE("singular common covariance separates laws shifted off its range") {
  Eigen::Matrix2d rank1;
  rank1 << 1, 0, 0, 0;
  CHECK(tv_gaussian(normal2(1, 0, rank1), normal2(0, 0, rank1)) ==
        doctest::Approx(0.38292492254802621).epsilon(1e-12));
  CHECK(tv_gaussian(normal2(0, 0.5, rank1), normal2(0, 0, rank1)) == 1.0);
  const Eigen::Matrix2d zero = Eigen::Matrix2d::Zero();
  CHECK(tv_gaussian(normal2(0, 0, zero), normal2(0, 0, zero)) == 0.0);
  CHECK(tv_gaussian(normal2(1, 0, zero), normal2(0, 0, zero)) == 1.0);
}

TEST_CASE("degenerate univariate laws behave as point masses") {
  CHECK(tv_gaussian(normal1(0, 0), normal1(0, 1)) == 1.0);
  CHECK(tv_gaussian(normal1(2, 0), normal1(2, 0)) == 0.0);
  CHECK(tv_gaussian(normal1(2, 0), normal1(1, 0)) == 1.0);
}

TEST_CASE("total variation is invariant under joint scaling and translation") {
  // Zero-homogeneity: scaling both laws by c leaves the distance unchanged.
  const double base_eq = tv_gaussian(normal1(0.3, 1.44), normal1(-0.2, 1.44));
  const double base_uneq = tv_gaussian(normal1(0.3, 1.0), normal1(-0.2, 2.89));
  for (double c : {-2.0, 0.5, 10.0}) {
    CHECK(tv_gaussian(normal1(c * 0.3, c * c * 1.44),
                      normal1(c * -0.2, c * c * 1.44)) ==
          doctest::Approx(base_eq).epsilon(1e-10));
    CHECK(tv_gaussian(normal1(c * 0.3, c * c * 1.0),
                      normal1(c * -0.2, c * c * 2.89)) ==
          doctest::Approx(base_uneq).epsilon(1e-10));
  }
  // Translation invariance: the distance depends only on the mean gap.
  for (double t : {0.7, -3.1}) {
    CHECK(tv_gaussian(normal1(0.3 + t, 1.0), normal1(-0.2 + t, 2.89)) ==
          doctest::Approx(base_uneq).epsilon(1e-10));
  }
}

TEST_CASE("total variation saturates at twelve standard deviations of shift") {
  CHECK(tv_gaussian(normal1(12, 1), normal1(0, 1)) >= 1.0 - 1e-6);
}

TEST_CASE("total variation is Lipschitz in the shift") {
  // d/dv [2Φ(v/2)−1] = φ(v/2) ≤ 1/√(2π): nearby shifts give nearby values.
  const double lipschitz = 1.0 / std::sqrt(2.0 * std::numbers::pi) + 1e-9;
  for (double v : {0.0, 0.5, 2.0}) {
    for (double dv : {1e-3, 1e-6}) {
      const double gap = std::abs(tv_gaussian(normal1(v + dv, 1), normal1(0, 1)) -
                                  tv_gaussian(normal1(v, 1), normal1(0, 1)));
      CHECK(gap <= lipschitz * dv);
    }
  }
}

// ── tv_from_densities ────────────────────────────────────────────────────────

TEST_CASE("density-grid total variation vanishes on identical inputs") {
  const Eigen::VectorXd x = uniform_grid(-10.0, 10.0, 1e-3);
  DensityGrid f;
  f.x = x;
  f.f = x.unaryExpr([](double v) { return gauss_pdf(v, 0, 1); });
  const TvDensityEstimate est = tv_from_densities(f, f);
  CHECK(est.value == 0.0);
  CHECK(est.tail_mass < 1e-8);
}

TEST_CASE("density-grid total variation reproduces the Gaussian closed form") {
  const Eigen::VectorXd x = uniform_grid(-10.0, 11.0, 1e-3);
  DensityGrid f1, f2;
  f1.x = x;
  f1.f = x.unaryExpr([](double v) { return gauss_pdf(v, 1, 1); });
  f2.x = x;
  f2.f = x.unaryExpr([](double v) { return gauss_pdf(v, 0, 1); });
  CHECK(tv_from_densities(f1, f2).value ==
        doctest::Approx(0.38292492254802621).epsilon(1e-5));
}

TEST_CASE("densities with disjoint supports are at maximal distance") {
  const Eigen::VectorXd x = uniform_grid(-5.0, 5.0, 1e-3);
  auto triangle = [](double v, double centre) {
    const double d = std::abs(v - centre);
    return d < 1.0 ? 1.0 - d : 0.0;
  };
  DensityGrid f1, f2;
  f1.x = x;
  f1.f = x.unaryExpr([&](double v) { return triangle(v, -3.0); });
  f2.x = x;
  f2.f = x.unaryExpr([&](double v) { return triangle(v, 3.0); });
  CHECK(tv_from_densities(f1, f2).value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("density-grid total variation rejects mismatched grids") {
  DensityGrid f1, f2;
  f1.x = uniform_grid(-1.0, 1.0, 0.1);
  f1.f = Eigen::VectorXd::Constant(f1.x.size(), 0.5);
  f2.x = uniform_grid(-1.0, 1.2, 0.1);
  f2.f = Eigen::VectorXd::Constant(f2.x.size(), 0.5);
  CHECK_THROWS_AS(tv_from_densities(f1, f2), GridMismatch);
  f2.x = f1.x.array() + 0.05;
  f2.f = Eigen::VectorXd::Constant(f2.x.size(), 0.5);
  CHECK_THROWS_AS(tv_from_densities(f1, f2), GridMismatch);
}

TEST_CASE("density-grid total variation rejects unnormalized input") {
  const Eigen::VectorXd x = uniform_grid(-10.0, 10.0, 1e-3);
  DensityGrid good, bad;
  good.x = x;
  good.f = x.unaryExpr([](double v) { return gauss_pdf(v, 0, 1); });
  bad.x = x;
  bad.f = good.f * 1.001;
  CHECK_THROWS_AS(tv_from_densities(good, bad), NotNormalized);
}

// ── density_from_cf ──────────────────────────────────────────────────────────

TEST_CASE("characteristic-function inversion at stability index two is Gaussian") {
  const Eigen::VectorXd x = uniform_grid(-20.0, 20.0, 0.25);
  StableLawDescriptor law;
  law.alpha = 2.0;
  law.scale_c = 1.0;
  const DensityGrid d = density_from_cf(law, x);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    worst = std::max(worst, std::abs(d.f(i) - gauss_pdf(x(i), 0, std::sqrt(2.0))));
  CHECK(worst <= 1e-6);
}

TEST_CASE("heavy-tailed inversion matches quadrature values and normalizes") {
  const Eigen::VectorXd x = uniform_grid(-8192.0, 8192.0, 0.25);
  StableLawDescriptor law;
  law.alpha = 1.5;
  law.scale_c = 1.0;
  const DensityGrid d = density_from_cf(law, x);
  const Eigen::Index centre = (x.size() - 1) / 2;
  CHECK(d.f(centre) == doctest::Approx(0.28735275145216445).epsilon(1e-6));
  CHECK(d.f(centre + 4) == doctest::Approx(0.20203815960957512).epsilon(1e-6));
  CHECK(d.f(centre + 8) == doctest::Approx(0.084539623126444225).epsilon(1e-6));
  // Symmetric law: the inverted density is even.
  CHECK(std::abs(d.f(centre + 4) - d.f(centre - 4)) < 1e-12);
  // Trapezoid mass after renormalization is exactly 1.
  double mass = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
    mass += 0.5 * (d.f(i) + d.f(i + 1)) * 0.25;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a location parameter translates the inverted density") {
  const Eigen::VectorXd x = uniform_grid(-8192.0, 8192.0, 0.25);
  StableLawDescriptor law;
  law.alpha = 1.5;
  law.scale_c = 1.0;
  law.location = 1.0;
  const DensityGrid d = density_from_cf(law, x);
  const Eigen::Index centre = (x.size() - 1) / 2;
  CHECK(d.f(centre + 4) == doctest::Approx(0.28735275145216445).epsilon(1e-6));
  CHECK(d.f(centre + 8) == doctest::Approx(0.20203815960957512).epsilon(1e-6));
  CHECK(d.f(centre) == doctest::Approx(0.20203815960957512).epsilon(1e-6));
}

TEST_CASE("doubling the stable scale rescales the density self-similarly") {
  const Eigen::VectorXd x = uniform_grid(-8192.0, 8192.0, 0.25);
  StableLawDescriptor law;
  law.alpha = 1.5;
  law.scale_c = 1.0;
  const DensityGrid base = density_from_cf(law, x);
  const double factor = std::pow(2.0, 1.0 / law.alpha);
  StableLawDescriptor doubled = law;
  doubled.scale_c = 2.0;
  const DensityGrid scaled = density_from_cf(doubled, (factor * x).eval());
  for (Eigen::Index i : {x.size() / 2, x.size() / 2 + 4, x.size() / 2 + 40}) {
    CHECK(factor * scaled.f(i) == doctest::Approx(base.f(i)).epsilon(1e-7));
  }
}

TEST_CASE("inversion rejects grids whose frequency cutoff truncates the CF") {
  StableLawDescriptor law;
  law.alpha = 1.5;
  law.scale_c = 1.0;
  CHECK_THROWS_AS(density_from_cf(law, uniform_grid(-100.0, 100.0, 1.0)),
                  NyquistViolation);
}

TEST_CASE("inversion rejects grids too short for the heavy tails") {
  StableLawDescriptor law;
  law.alpha = 1.5;
  law.scale_c = 1.0;
  CHECK_THROWS_AS(density_from_cf(law, uniform_grid(-50.0, 50.0, 0.25)),
                  NotNormalized);
}

TEST_CASE("inversion validates the grid shape and the law parameters") {
  StableLawDescriptor law;
  law.alpha = 1.5;
  law.scale_c = 1.0;
  CHECK_THROWS_AS(density_from_cf(law, uniform_grid(-10.0, 10.25, 0.25)),
                  std::invalid_argument);  // even point count
  Eigen::VectorXd shifted = uniform_grid(-10.0, 10.0, 0.25).array() + 0.05;
  CHECK_THROWS_AS(density_from_cf(law, shifted), std::invalid_argument);
  StableLawDescriptor bad = law;
  bad.alpha = 1.0;
  CHECK_THROWS_AS(density_from_cf(bad, uniform_grid(-20.0, 20.0, 0.25)),
                  std::invalid_argument);
  bad.alpha = 2.5;
  CHECK_THROWS_AS(density_from_cf(bad, uniform_grid(-20.0, 20.0, 0.25)),
                  std::invalid_argument);
}

// ── wp_exact ─────────────────────────────────────────────────────────────────

TEST_CASE("shift-additivity gives the norm for any law and every order") {
  Eigen::VectorXd shift(2);
  shift << 3, 4;
  const LawDescriptor gaussian = normal2(0, 0, Eigen::Matrix2d::Identity());
  for (double p : {1.0, 2.0, 3.7}) CHECK(wp_exact(gaussian, shift, p) == 5.0);
  CHECK(wp_exact(gaussian, Eigen::VectorXd::Zero(2), 2.0) == 0.0);
  StableLawDescriptor stable;
  stable.alpha = 1.5;
  stable.scale_c = 1.0;
  CHECK(wp_exact(stable, Eigen::VectorXd::Constant(1, 2.0), 1.0) == 2.0);
}

TEST_CASE("stable laws refuse orders at or beyond their stability index") {
  StableLawDescriptor stable;
  stable.alpha = 1.5;
  stable.scale_c = 1.0;
  const Eigen::VectorXd shift = Eigen::VectorXd::Constant(1, 2.0);
  CHECK_THROWS_AS(wp_exact(stable, shift, 1.6), MomentViolation);
  CHECK_THROWS_AS(wp_exact(stable, shift, 1.5), MomentViolation);
  CHECK_THROWS_AS(wp_exact(stable, shift, 0.5), std::invalid_argument);
}

// ── wp_empirical ─────────────────────────────────────────────────────────────

TEST_CASE("empirical distance between a sample and its shift is the shift") {
  Rng rng = stream_for(7, 1);
  Eigen::MatrixXd s1(100, 1);
  for (Eigen::Index i = 0; i < 100; ++i) s1(i, 0) = rng.normal();
  const Eigen::MatrixXd s2 = s1.array() + 2.5;
  for (double p : {1.0, 2.0, 3.0})
    CHECK(wp_empirical(s1, s2, p) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(wp_empirical(s1, s1, 2.0) == 0.0);
}

TEST_CASE("univariate empirical distance uses the sorted coupling") {
  Eigen::MatrixXd s1(2, 1), s2(2, 1);
  s1 << 0, 1;
  s2 << 5, 2;
  CHECK(wp_empirical(s1, s2, 1.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(wp_empirical(s1, s2, 2.0) ==
        doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));
}

TEST_CASE("multivariate empirical distance matches brute-force assignment") {
  Rng rng = stream_for(7, 2);
  for (int n : {3, 5, 7}) {
    Eigen::MatrixXd s1(n, 2), s2(n, 2);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < 2; ++j) {
        s1(i, j) = rng.normal();
        s2(i, j) = rng.normal();
      }
    for (double p : {1.0, 2.0, 3.5}) {
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double best = std::numeric_limits<double>::infinity();
      do {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          acc += std::pow((s1.row(i) - s2.row(perm[i])).norm(), p);
        best = std::min(best, acc);
      } while (std::next_permutation(perm.begin(), perm.end()));
      CHECK(wp_empirical(s1, s2, p) ==
            doctest::Approx(std::pow(best / n, 1.0 / p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("constant-shift sample pairs short-circuit to the shift norm") {
  Rng rng = stream_for(7, 3);
  const Eigen::Index n = 10000;
  Eigen::MatrixXd s1(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    s1(i, 0) = rng.normal();
    s1(i, 1) = rng.normal();
  }
  Eigen::MatrixXd s2 = s1;
  s2.col(0).array() += 3.0;
  s2.col(1).array() += 4.0;
  for (double p : {1.0, 2.0, 4.0})
    CHECK(wp_empirical(s1, s2, p) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("empirical distance rejects mismatched or oversized inputs") {
  CHECK_THROWS_AS(wp_empirical(Eigen::MatrixXd::Zero(3, 1),
                               Eigen::MatrixXd::Zero(4, 1), 1.0),
                  UnequalCounts);
  Rng rng = stream_for(7, 4);
  Eigen::MatrixXd big1(2049, 2), big2(2049, 2);
  for (Eigen::Index i = 0; i < 2049; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) {
      big1(i, j) = rng.normal();
      big2(i, j) = rng.normal();
    }
  CHECK_THROWS_AS(wp_empirical(big1, big2, 2.0), TooLargeForExact);
}

TEST_CASE("empirical distance is one-homogeneous under sample scaling") {
  Rng rng = stream_for(7, 5);
  Eigen::MatrixXd s1(101, 1), s2(101, 1);
  for (Eigen::Index i = 0; i < 101; ++i) {
    s1(i, 0) = rng.normal();
    s2(i, 0) = 0.5 * rng.normal() + 1.0;
  }
  const double base = wp_empirical(s1, s2, 2.0);
  for (double c : {-2.0, 0.5}) {
    CHECK(wp_empirical((c * s1).eval(), (c * s2).eval(), 2.0) ==
          doctest::Approx(std::abs(c) * base).epsilon(1e-12));
  }
  Eigen::MatrixXd m1(64, 2), m2(64, 2);
  for (Eigen::Index i = 0; i < 64; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) {
      m1(i, j) = rng.normal();
      m2(i, j) = rng.normal();
    }
  const double base2 = wp_empirical(m1, m2, 2.0);
  CHECK(wp_empirical((-2.0 * m1).eval(), (-2.0 * m2).eval(), 2.0) ==
        doctest::Approx(2.0 * base2).epsilon(1e-10));
}

TEST_CASE("empirical distance obeys the shift and scaling continuity bound") {
  // Against a common driver X: the distance between v1 + M1·X and v2 + M2·X
  // is at most ‖v1−v2‖ + ‖M1−M2‖·(mean ‖X‖^p)^{1/p}.
  Rng rng = stream_for(7, 6);
  const Eigen::Index n = 256;
  Eigen::MatrixXd x(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) x(i, j) = rng.normal();
  Eigen::Matrix2d m1 = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d m2;
  m2 << 1, 0.3, 0, 0.8;
  Eigen::RowVector2d v1(1, 0), v2(0, 1);
  const Eigen::MatrixXd s1 = (x * m1.transpose()).rowwise() + v1;
  const Eigen::MatrixXd s2 = (x * m2.transpose()).rowwise() + v2;
  for (double p : {1.0, 2.0}) {
    double moment = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      moment += std::pow(x.row(i).norm(), p);
    moment = std::pow(moment / static_cast<double>(n), 1.0 / p);
    const double op_norm_gap =
        (m1 - m2).jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
            .singularValues()(0);
    CHECK(wp_empirical(s1, s2, p) <=
          (v1 - v2).norm() + op_norm_gap * moment + 1e-12);
  }
}

// ── wp_gaussian_univariate ───────────────────────────────────────────────────

TEST_CASE("Gaussian couplings match closed forms for the first three orders") {
  CHECK(wp_gaussian_univariate(0, 1, 1, 1.3, 1.0) ==
        doctest::Approx(1.000067246731381).epsilon(1e-12));
  CHECK(wp_gaussian_univariate(0, 1, 1, 1.3, 2.0) ==
        doctest::Approx(1.044030650891055).epsilon(1e-12));
  CHECK(wp_gaussian_univariate(0, 1, 1, 1.3, 3.0) ==
        doctest::Approx(1.0829327354885276).epsilon(1e-12));
}

TEST_CASE("Gaussian couplings at pure scale changes reduce to absolute moments") {
  CHECK(wp_gaussian_univariate(0, 1, 0, 2, 1.0) ==
        doctest::Approx(0.79788456080286536).epsilon(1e-12));
  CHECK(wp_gaussian_univariate(0, 1, 0, 4, 1.0) ==
        doctest::Approx(2.3936536824085961).epsilon(1e-12));
  CHECK(wp_gaussian_univariate(0.7, 2, 3.2, 2, 5.0) ==
        doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("Gaussian couplings interpolate monotonically in the order") {
  // Quadrature orders sit between the closed forms on either side.
  CHECK(wp_gaussian_univariate(0, 1, 1, 1.3, 1.5) ==
        doctest::Approx(1.0228342599100895).epsilon(1e-8));
  CHECK(wp_gaussian_univariate(0, 1, 1, 1.3, 2.5) ==
        doctest::Approx(1.0639900950751814).epsilon(1e-8));
  const double w1 = wp_gaussian_univariate(0, 1, 1, 1.3, 1.0);
  const double w15 = wp_gaussian_univariate(0, 1, 1, 1.3, 1.5);
  const double w2 = wp_gaussian_univariate(0, 1, 1, 1.3, 2.0);
  const double w25 = wp_gaussian_univariate(0, 1, 1, 1.3, 2.5);
  const double w3 = wp_gaussian_univariate(0, 1, 1, 1.3, 3.0);
  CHECK(w1 < w15);
  CHECK(w15 < w2);
  CHECK(w2 < w25);
  CHECK(w25 < w3);
}

TEST_CASE("normal absolute moments match the gamma-function closed form") {
  CHECK(normal_absolute_moment(1.0) ==
        doctest::Approx(0.79788456080286536).epsilon(1e-13));
  CHECK(normal_absolute_moment(2.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(normal_absolute_moment(3.0) ==
        doctest::Approx(1.5957691216057307).epsilon(1e-13));
  CHECK(normal_absolute_moment(4.0) == doctest::Approx(3.0).epsilon(1e-13));
}

// ── profile_tv / profile_wp ──────────────────────────────────────────────────

TEST_CASE("univariate distance profile matches the erf form at the window centre") {
  CHECK(profile_tv(1.0, 1.0, 1.0, 0.5, 0.0) ==
        doctest::Approx(0.52049987781304654).epsilon(1e-12));
}

TEST_CASE("distance profile sweeps from one to zero across the window") {
  double previous = 1.1;
  for (double r = -8.0; r <= 8.0; r += 0.5) {
    const double value = profile_tv(1.0, 1.0, 1.0, 0.5, r);
    CHECK(value <= previous);
    // Strict decrease once below floating-point saturation at 1.
    if (r >= -2.0) CHECK(value < previous);
    previous = value;
  }
  CHECK(profile_tv(1.0, 1.0, 1.0, 0.5, -8.0) >= 1.0 - 1e-6);
  CHECK(profile_tv(1.0, 1.0, 1.0, 0.5, 8.0) <= 1e-3);
}

TEST_CASE("matrix-valued distance profile routes through equal covariances") {
  Eigen::VectorXd v(2);
  v << 1, 0;
  const GaussianLaw z = normal2(0, 0, Eigen::Matrix2d::Identity());
  CHECK(profile_tv(1.0, 2, 1.0, v, z, 0.0) ==
        doctest::Approx(0.38292492254802621).epsilon(1e-12));
}

TEST_CASE("distance profile refuses singular limit laws") {
  Eigen::Matrix2d rank1;
  rank1 << 1, 0, 0, 0;
  Eigen::VectorXd v(2);
  v << 1, 0;
  CHECK_THROWS_AS(profile_tv(1.0, 2, 1.0, v, normal2(0, 0, rank1), 0.0),
                  SingularLimitLaw);
  CHECK_THROWS_AS(profile_tv(1.0, 1.0, 1.0, 0.0, 0.0), SingularLimitLaw);
}

TEST_CASE("transport profile is exponential in r and independent of the order") {
  const Eigen::VectorXd v2 = Eigen::VectorXd::Constant(1, 2.0);
  CHECK(profile_wp(1.0, 1, 1.0, v2, 0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(profile_wp(1.0, 1, 1.0, v2, 1.0, 1.0) ==
        doctest::Approx(0.73575888234288464).epsilon(1e-12));
  Eigen::VectorXd e1(2);
  e1 << 1, 0;
  CHECK(profile_wp(2.0, 2, 1.0, e1, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  const Eigen::VectorXd unit = Eigen::VectorXd::Constant(1, 1.0);
  for (double r = -4.0; r <= 4.0; r += 0.5) {
    CHECK(profile_wp(1.0, 1, 1.0, unit, r, 1.0) ==
          doctest::Approx(std::exp(-r)).epsilon(1e-12));
    CHECK(profile_wp(1.0, 1, 1.0, unit, r, 3.7) ==
          doctest::Approx(std::exp(-r)).epsilon(1e-12));
  }
}

// ── assignment solver ────────────────────────────────────────────────────────

TEST_CASE("assignment solver finds the optimum on random instances") {
  Rng rng = stream_for(7, 8);
  for (int n : {2, 4, 6}) {
    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cost(i, j) = std::abs(rng.normal());
    double total = 0.0;
    const std::vector<int> assignment = detail::solve_assignment(cost, total);
    // A valid permutation ...
    std::vector<char> seen(n, 0);
    for (int col : assignment) {
      REQUIRE(col >= 0);
      REQUIRE(col < n);
      seen[col] = 1;
    }
    CHECK(std::count(seen.begin(), seen.end(), 1) == n);
    // ... achieving the brute-force minimum.
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += cost(i, perm[i]);
      best = std::min(best, acc);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(total == doctest::Approx(best).epsilon(1e-12));
  }
}
