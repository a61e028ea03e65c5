#pragma once

/*
 * Deterministic scale functions σ_t.
 *
 * A scale function normalizes the noise amplitude of a process family: σ≡1
 * for the exponential-rate families, σ_t = √t for the integrated Gaussian
 * family, σ_t = t^{1/α} for the integrated stable one, and user tables for
 * anything else.  Admissible scales are slowly varying (σ_{t+r}/σ_t → 1),
 * which the engine's karamata_check verifies; this type only evaluates.
 */

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "cutofflab/errors.hpp"

namespace cutofflab {

enum class ScaleKind { one, sqrt_t, power, table };

class ScaleFunction {
 public:
  static ScaleFunction one() { return ScaleFunction(ScaleKind::one, 0.0); }
  static ScaleFunction sqrt_t() { return ScaleFunction(ScaleKind::sqrt_t, 0.5); }
  static ScaleFunction power(double exponent) {
    return ScaleFunction(ScaleKind::power, exponent);
  }

  // Piecewise-linear interpolation through (t, σ) knots; σ values must be
  // positive and knots strictly increasing in t.  Evaluation clamps to the
  // boundary values outside the knot range.
  static ScaleFunction table(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2)
      throw InadmissibleRange("ScaleFunction::table: need at least two knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!(knots[i].second > 0.0))
        throw InadmissibleRange("ScaleFunction::table: sigma values must be positive");
      if (i > 0 && !(knots[i].first > knots[i - 1].first))
        throw InadmissibleRange("ScaleFunction::table: knots must be strictly increasing");
    }
    ScaleFunction s(ScaleKind::table, 0.0);
    s.knots_ = std::move(knots);
    return s;
  }

  double operator()(double t) const {
    switch (kind_) {
      case ScaleKind::one:
        return 1.0;
      case ScaleKind::sqrt_t:
        return std::sqrt(t);
      case ScaleKind::power:
        return std::pow(t, exponent_);
      case ScaleKind::table:
        return interpolate(t);
    }
    return 1.0;
  }

  ScaleKind kind() const { return kind_; }
  double exponent() const { return exponent_; }

 private:
  ScaleFunction(ScaleKind kind, double exponent) : kind_(kind), exponent_(exponent) {}

  double interpolate(double t) const {
    if (t <= knots_.front().first) return knots_.front().second;
    if (t >= knots_.back().first) return knots_.back().second;
    std::size_t hi = 1;
    while (knots_[hi].first < t) ++hi;
    const auto& [t0, s0] = knots_[hi - 1];
    const auto& [t1, s1] = knots_[hi];
    const double w = (t - t0) / (t1 - t0);
    return s0 + w * (s1 - s0);
  }

  ScaleKind kind_;
  double exponent_;
  std::vector<std::pair<double, double>> knots_;
};

}  // namespace cutofflab
