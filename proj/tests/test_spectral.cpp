#include "doctest.h"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "cutofflab/errors.hpp"
#include "cutofflab/scale.hpp"
#include "cutofflab/spectral.hpp"

using namespace cutofflab;
using namespace cutofflab::spectral;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

Eigen::VectorXd vec(std::initializer_list<double> entries) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (double e : entries) v(i++) = e;
  return v;
}

// ── Five-matrix catalog with hand-computed decompositions ────────────────────

struct CatalogEntry {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd datum;
  double rate;
  int block_size;
  int mode_count;
  double settle_time;  // residual at this time is at most 1e-6
};

std::vector<CatalogEntry> catalog() {
  std::vector<CatalogEntry> entries;
  entries.push_back({mat2(1, 0, 0, 2), vec({1, 1}), 1.0, 1, 1, 14.0});
  entries.push_back({mat2(1, -1, 0, 1), vec({0, 1}), 1.0, 2, 1, 1.05e6});
  entries.push_back({mat2(1, -2, 2, 1), vec({1, 0}), 1.0, 1, 2, 1.0});
  Eigen::MatrixXd j3(3, 3);
  j3 << 1, -1, 0, 0, 1, 0, 0, 0, 3;
  entries.push_back({j3, vec({0, 1, 1}), 1.0, 2, 1, 1.05e6});
  Eigen::MatrixXd two_blocks(4, 4);
  two_blocks << 1, -2, 0, 0, 2, 1, 0, 0, 0, 0, 3, -1, 0, 0, 1, 3;
  entries.push_back({two_blocks, vec({1, 0, 1, 0}), 1.0, 1, 2, 7.0});
  return entries;
}

}  // namespace

// ── validate_stability ────────────────────────────────────────────────────────

TEST_CASE("stability check accepts positive-definite spectra and records the margin") {
  const StableMatrix a = validate_stability(mat2(1, 0, 0, 2));
  CHECK(a.spectral_margin == doctest::Approx(1.0).epsilon(1e-12));
  const StableMatrix rot = validate_stability(mat2(1, -2, 2, 1));
  CHECK(rot.spectral_margin == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stability check rejects spectra touching or crossing the imaginary axis") {
  CHECK_THROWS_AS(validate_stability(mat2(0, 0, 0, 1)), NotStable);
  CHECK_THROWS_AS(validate_stability(mat2(-1, 0, 0, 1)), NotStable);
  CHECK_THROWS_AS(validate_stability(mat2(1, 0, 0, -0.5)), NotStable);
}

TEST_CASE("stability check rejects non-square and non-finite input") {
  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(validate_stability(rect), std::invalid_argument);
  Eigen::MatrixXd bad = mat2(1, 0, 0, 1);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate_stability(bad), std::invalid_argument);
}

// ── dominant_decomposition ────────────────────────────────────────────────────

TEST_CASE("decomposition identifies rate, generalized block size, and mode count") {
  for (const auto& entry : catalog()) {
    const StableMatrix a = validate_stability(entry.matrix);
    const DominantDecomposition dec = dominant_decomposition(a, entry.datum);
    CHECK(dec.rate == doctest::Approx(entry.rate).epsilon(1e-9));
    CHECK(dec.block_size == entry.block_size);
    CHECK(dec.mode_count == entry.mode_count);
  }
}

TEST_CASE("decomposition of a scalar contraction degenerates to the datum itself") {
  Eigen::MatrixXd m(1, 1);
  m << 0.7;
  const DominantDecomposition dec =
      dominant_decomposition(validate_stability(m), vec({2.5}));
  CHECK(dec.rate == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(dec.block_size == 1);
  CHECK(dec.mode_count == 1);
  CHECK(dec.angular_velocities[0] == 0.0);
  CHECK(std::abs(dec.mode_vectors[0](0).real() - 2.5) < 1e-12);
  CHECK(std::abs(dec.mode_vectors[0](0).imag()) < 1e-12);
}

TEST_CASE("decomposition rejects a vanishing initial datum") {
  const StableMatrix a = validate_stability(mat2(1, 0, 0, 2));
  CHECK_THROWS_AS(dominant_decomposition(a, vec({0, 0})), ZeroInitialDatum);
  CHECK_THROWS_AS(dominant_decomposition(a, vec({1e-16, 0})), ZeroInitialDatum);
}

TEST_CASE("decomposition ignores eigenspaces the datum does not excite") {
  // Datum sits entirely in the fast eigenspace: the slow rate 1 is invisible.
  const StableMatrix a = validate_stability(mat2(1, 0, 0, 2));
  const DominantDecomposition dec = dominant_decomposition(a, vec({0, 1}));
  CHECK(dec.rate == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(dec.block_size == 1);
  CHECK(dec.mode_count == 1);
}

TEST_CASE("rotating pair reports conjugate angular velocities, positive first") {
  const StableMatrix a = validate_stability(mat2(1, -2, 2, 1));
  const DominantDecomposition dec = dominant_decomposition(a, vec({1, 0}));
  REQUIRE(dec.mode_count == 2);
  CHECK(dec.angular_velocities[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(dec.angular_velocities[1] == doctest::Approx(-2.0).epsilon(1e-9));
  // Conjugate projections of the datum onto the two eigenlines.
  CHECK(std::abs(dec.mode_vectors[0](0) - std::complex<double>(0.5, 0.0)) < 1e-9);
  CHECK(std::abs(dec.mode_vectors[0](1) - std::complex<double>(0.0, 0.5)) < 1e-9);
  CHECK(std::abs(dec.mode_vectors[1](0) - std::complex<double>(0.5, 0.0)) < 1e-9);
  CHECK(std::abs(dec.mode_vectors[1](1) - std::complex<double>(0.0, -0.5)) < 1e-9);
}

TEST_CASE("decomposition recovers the slow eigenprojection after a change of basis") {
  // Conjugating diag(1, 2.5, 4) by a known rotation moves the slow mode to
  // a known direction; the reported mode vector must follow it.
  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(3, 3);
  diag.diagonal() << 1.0, 2.5, 4.0;
  const double c = std::cos(0.4), s = std::sin(0.4);
  Eigen::MatrixXd p(3, 3);
  p << c, -s, 0, s, c, 0, 0, 0, 1;
  const Eigen::MatrixXd lambda = p * diag * p.transpose();
  const Eigen::VectorXd x = p * vec({1, 1, 1});
  const DominantDecomposition dec =
      dominant_decomposition(validate_stability(lambda), x);
  CHECK(dec.rate == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(dec.block_size == 1);
  REQUIRE(dec.mode_count == 1);
  const Eigen::VectorXd expected = p.col(0);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(dec.mode_vectors[0](i).real() - expected(i)) < 1e-9);
    CHECK(std::abs(dec.mode_vectors[0](i).imag()) < 1e-9);
  }
}

// ── dominant_trajectory ───────────────────────────────────────────────────────

TEST_CASE("trajectory of the rotating pair traces the unit circle clockwise") {
  const StableMatrix a = validate_stability(mat2(1, -2, 2, 1));
  const DominantDecomposition dec = dominant_decomposition(a, vec({1, 0}));
  const Eigen::VectorXd at_zero = dominant_trajectory(dec, 0.0);
  CHECK(at_zero(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(at_zero(1)) < 1e-9);
  const Eigen::VectorXd quarter = dominant_trajectory(dec, std::numbers::pi / 4);
  CHECK(std::abs(quarter(0)) < 1e-9);
  CHECK(quarter(1) == doctest::Approx(-1.0).epsilon(1e-9));
  for (double t : {0.3, 1.7, 9.1}) {
    const Eigen::VectorXd v = dominant_trajectory(dec, t);
    CHECK(v(0) == doctest::Approx(std::cos(2 * t)).epsilon(1e-9));
    CHECK(v(1) == doctest::Approx(-std::sin(2 * t)).epsilon(1e-9));
  }
}

TEST_CASE("trajectory of a defective block is the constant chain-top direction") {
  const StableMatrix a = validate_stability(mat2(1, -1, 0, 1));
  const DominantDecomposition dec = dominant_decomposition(a, vec({0, 1}));
  for (double t : {0.0, 2.0, 50.0}) {
    const Eigen::VectorXd v = dominant_trajectory(dec, t);
    CHECK(v(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(v(1)) < 1e-9);
  }
}

// ── hg_residual ───────────────────────────────────────────────────────────────

TEST_CASE("rescaled trajectories settle onto the dominant term by the catalog times") {
  for (const auto& entry : catalog()) {
    const StableMatrix a = validate_stability(entry.matrix);
    const DominantDecomposition dec = dominant_decomposition(a, entry.datum);
    const double at_settle = hg_residual(a, entry.datum, dec, entry.settle_time);
    CHECK(at_settle <= 1e-6);
    // Doubling the horizon at least halves the residual.
    const double at_double = hg_residual(a, entry.datum, dec, 2 * entry.settle_time);
    CHECK(at_double <= 0.5 * at_settle * (1 + 1e-6) + 1e-12);
  }
}

TEST_CASE("residual decay matches the subdominant gap for a diagonal system") {
  const StableMatrix a = validate_stability(mat2(1, 0, 0, 2));
  const DominantDecomposition dec = dominant_decomposition(a, vec({1, 1}));
  for (double t : {1.0, 5.0, 14.0}) {
    CHECK(hg_residual(a, vec({1, 1}), dec, t) ==
          doctest::Approx(std::exp(-t)).epsilon(1e-9));
  }
}

TEST_CASE("residual of a defective block decays like one over time") {
  const StableMatrix a = validate_stability(mat2(1, -1, 0, 1));
  const DominantDecomposition dec = dominant_decomposition(a, vec({0, 1}));
  for (double t : {10.0, 1e3, 1.05e6}) {
    CHECK(hg_residual(a, vec({0, 1}), dec, t) ==
          doctest::Approx(1.0 / t).epsilon(1e-6));
  }
}

TEST_CASE("residual vanishes when the dominant term is exact") {
  const StableMatrix a = validate_stability(mat2(1, -2, 2, 1));
  const DominantDecomposition dec = dominant_decomposition(a, vec({1, 0}));
  CHECK(hg_residual(a, vec({1, 0}), dec, 1.0) < 1e-12);
  CHECK(hg_residual(a, vec({1, 0}), dec, 100.0) < 1e-10);
}

TEST_CASE("residual rejects non-positive and non-representable times") {
  const StableMatrix a = validate_stability(mat2(1, -1, 0, 1));
  const DominantDecomposition dec = dominant_decomposition(a, vec({0, 1}));
  CHECK_THROWS_AS(hg_residual(a, vec({0, 1}), dec, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(hg_residual(a, vec({0, 1}), dec, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(
      hg_residual(a, vec({0, 1}), dec, std::numeric_limits<double>::infinity()),
      Overflow);
}

// ── omega_limit_set ───────────────────────────────────────────────────────────

TEST_CASE("limit set of purely real dominant modes is a single point") {
  const StableMatrix a = validate_stability(mat2(1, 0, 0, 2));
  const DominantDecomposition dec = dominant_decomposition(a, vec({1, 1}));
  const OmegaLimitSet omega = omega_limit_set(dec, 64);
  CHECK(omega.kind == OmegaLimitSet::Kind::point);
  REQUIRE(omega.samples.size() == 1);
  CHECK((omega.samples[0] - vec({1, 0})).norm() < 1e-9);
  CHECK(omega.diameter == 0.0);
}

TEST_CASE("commensurable angular velocities give a finite orbit on the time lattice") {
  // Angular velocity pi/2: period four under unit time steps.
  const StableMatrix a = validate_stability(mat2(1, -std::numbers::pi / 2,
                                                 std::numbers::pi / 2, 1));
  const DominantDecomposition dec = dominant_decomposition(a, vec({1, 0}));
  const OmegaLimitSet omega = omega_limit_set(dec, 64);
  CHECK(omega.kind == OmegaLimitSet::Kind::finite_orbit);
  REQUIRE(omega.samples.size() == 4);
  CHECK((omega.samples[0] - vec({1, 0})).norm() < 1e-9);
  CHECK((omega.samples[1] - vec({0, -1})).norm() < 1e-9);
  CHECK((omega.samples[2] - vec({-1, 0})).norm() < 1e-9);
  CHECK((omega.samples[3] - vec({0, 1})).norm() < 1e-9);
  CHECK(omega.diameter == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("incommensurable angular velocity fills the circle densely") {
  const StableMatrix a = validate_stability(mat2(1, -2, 2, 1));
  const DominantDecomposition dec = dominant_decomposition(a, vec({1, 0}));
  const OmegaLimitSet omega = omega_limit_set(dec, 256);
  CHECK(omega.kind == OmegaLimitSet::Kind::torus_closure);
  CHECK(omega.samples.size() == 256);
  for (const auto& s : omega.samples) CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(omega.diameter == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("rational velocity with an oversized denominator is treated as dense") {
  const double theta = 2 * std::numbers::pi / 65;
  const StableMatrix a = validate_stability(mat2(1, -theta, theta, 1));
  const DominantDecomposition dec = dominant_decomposition(a, vec({1, 0}));
  const OmegaLimitSet omega = omega_limit_set(dec, 64);
  CHECK(omega.kind == OmegaLimitSet::Kind::torus_closure);
}

TEST_CASE("limit set computation rejects a degenerate sampling resolution") {
  const StableMatrix a = validate_stability(mat2(1, -2, 2, 1));
  const DominantDecomposition dec = dominant_decomposition(a, vec({1, 0}));
  CHECK_THROWS_AS(omega_limit_set(dec, 8), std::invalid_argument);
}

// ── cutoff_time_scale ─────────────────────────────────────────────────────────

TEST_CASE("cutoff times reproduce the closed-form schedule in three regimes") {
  const double eps = std::exp(-10.0);
  SUBCASE("unit rate, simple block, constant scale") {
    const CutoffSchedule s = cutoff_time_scale(1.0, 1, ScaleFunction::one(), eps, 1.0);
    CHECK(s.t_star == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(s.t_cut == doctest::Approx(10.0).epsilon(1e-12));
  }
  SUBCASE("defective block adds a logarithmic correction") {
    const CutoffSchedule s = cutoff_time_scale(1.0, 2, ScaleFunction::one(), eps, 1.0);
    CHECK(s.t_cut == doctest::Approx(12.302585092994046).epsilon(1e-12));
  }
  SUBCASE("growing driver scale brings the cutoff forward") {
    const CutoffSchedule s =
        cutoff_time_scale(1.0, 1, ScaleFunction::sqrt_t(), eps, 1.0);
    CHECK(s.t_cut == doctest::Approx(8.848707453502977).epsilon(1e-12));
  }
}

TEST_CASE("cutoff times scale inversely with the rate") {
  const CutoffSchedule s = cutoff_time_scale(0.5, 1, ScaleFunction::one(), 1e-2, 1.0);
  CHECK(s.t_star == doctest::Approx(9.2103403719761827).epsilon(1e-12));
  CHECK(s.t_cut == doctest::Approx(s.t_star).epsilon(1e-12));
}

TEST_CASE("deeper blocks and larger scales shift the cutoff in opposite directions") {
  SUBCASE("third-order block") {
    const CutoffSchedule s = cutoff_time_scale(2.0, 3, ScaleFunction::one(), 1e-3, 1.0);
    CHECK(s.t_star == doctest::Approx(3.4538776394910685).epsilon(1e-12));
    CHECK(s.t_cut == doctest::Approx(5.386522373407134).epsilon(1e-12));
  }
  SUBCASE("constant scale two") {
    const ScaleFunction sigma = ScaleFunction::table({{0.0, 2.0}, {100.0, 2.0}});
    const CutoffSchedule s = cutoff_time_scale(1.0, 2, sigma, 1e-2, 1.0);
    CHECK(s.t_star == doctest::Approx(4.6051701859880914).epsilon(1e-12));
    CHECK(s.t_cut == doctest::Approx(5.4392026312360472).epsilon(1e-12));
  }
}

TEST_CASE("cutoff time computation rejects thresholds outside the open unit interval") {
  CHECK_THROWS_AS(cutoff_time_scale(1.0, 1, ScaleFunction::one(), 0.0, 1.0),
                  InvalidEpsilon);
  CHECK_THROWS_AS(cutoff_time_scale(1.0, 1, ScaleFunction::one(), 1.0, 1.0),
                  InvalidEpsilon);
  CHECK_THROWS_AS(cutoff_time_scale(1.0, 1, ScaleFunction::one(), 1.5, 1.0),
                  InvalidEpsilon);
  CHECK_THROWS_AS(cutoff_time_scale(1.0, 1, ScaleFunction::one(), -0.1, 1.0),
                  InvalidEpsilon);
}

TEST_CASE("cutoff time computation rejects invalid rates, blocks, and windows") {
  CHECK_THROWS_AS(cutoff_time_scale(0.0, 1, ScaleFunction::one(), 0.1, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(cutoff_time_scale(1.0, 0, ScaleFunction::one(), 0.1, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(cutoff_time_scale(1.0, 1, ScaleFunction::one(), 0.1, 0.0),
                  std::invalid_argument);
}

// ── asymptotic_prefactor ──────────────────────────────────────────────────────

TEST_CASE("window-centre prefactors approach the limiting value from above") {
  // Rate 2, second-order block, constant scale, thresholds 10^-k.
  const double expected[] = {0.6658114210908611, 0.63988949056985427,
                             0.6205344600034282, 0.6061185693035482,
                             0.59503057825692557};
  double previous_gap = std::numeric_limits<double>::infinity();
  for (int k = 2; k <= 6; ++k) {
    const CutoffSchedule s =
        cutoff_time_scale(2.0, 2, ScaleFunction::one(), std::pow(10.0, -k), 1.0);
    const PrefactorPair pair = asymptotic_prefactor(s, 0.0, 2.0, 2, ScaleFunction::one());
    CHECK(pair.finite_value == doctest::Approx(expected[k - 2]).epsilon(1e-12));
    CHECK(pair.limit_value == doctest::Approx(0.5).epsilon(1e-12));
    const double gap = pair.finite_value - pair.limit_value;
    CHECK(gap > 0.0);
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
}

TEST_CASE("limiting prefactor decays exponentially across the window") {
  const CutoffSchedule s = cutoff_time_scale(2.0, 2, ScaleFunction::one(), 1e-4, 1.0);
  const PrefactorPair at_zero = asymptotic_prefactor(s, 0.0, 2.0, 2, ScaleFunction::one());
  const PrefactorPair at_one = asymptotic_prefactor(s, 1.0, 2.0, 2, ScaleFunction::one());
  CHECK(at_one.limit_value ==
        doctest::Approx(at_zero.limit_value * std::exp(-2.0)).epsilon(1e-12));
  const PrefactorPair at_minus = asymptotic_prefactor(s, -1.0, 2.0, 2,
                                                      ScaleFunction::one());
  CHECK(at_minus.limit_value ==
        doctest::Approx(at_zero.limit_value * std::exp(2.0)).epsilon(1e-12));
}

TEST_CASE("prefactor evaluation rejects windows reaching nonpositive times") {
  const CutoffSchedule s = cutoff_time_scale(1.0, 1, ScaleFunction::one(), 0.5, 1.0);
  CHECK_THROWS_AS(asymptotic_prefactor(s, -10.0, 1.0, 1, ScaleFunction::one()),
                  std::invalid_argument);
}
