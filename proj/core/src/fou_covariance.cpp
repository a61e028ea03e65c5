/*
 * Stationary fractional Ornstein–Uhlenbeck covariance and marginal law.
 *
 * The spectral density of the stationary fOU process is proportional to
 * |ω|^{1−2H}/(λ²+ω²); normalizing the t = 0 value to the analytic
 * λ^{−2H}Γ(2H+1)/2 fixes the constant via ∫_0^∞ ω^{1−2H}/(λ²+ω²) dω =
 * λ^{−2H}·π/(2 sin(πH)), giving
 *
 *     R(t) = (Γ(2H+1)·sin(πH)/π)·∫_0^∞ cos(ωt)·ω^{1−2H}/(λ²+ω²) dω.
 *
 * The integral is split at the first cosine zero π/(2t): tanh-sinh on the
 * head (which also absorbs the ω^{1−2H} endpoint singularity for H > 1/2),
 * then half-period panels by Gauss–Legendre.  Past the envelope peak the
 * panel integrals alternate with decreasing magnitude, so the tail is summed
 * by alternating-series extrapolation instead of brute-force truncation.
 */

#include "cutofflab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "cutofflab/errors.hpp"

namespace cutofflab::simulate {

namespace {

constexpr double kAbsoluteTol = 1e-9;
constexpr int kAccelerationTerms = 24;

std::string format_message(const char* fn, const char* what, double value) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s: %s (%.6g)", fn, what, value);
  return buf;
}

// Σ_{k≥0} (−1)^k a_k from the leading terms, by Chebyshev-weighted
// extrapolation; error decays like (3+√8)^{−n}.
double alternating_sum(const std::vector<double>& a, int n) {
  double d = std::pow(3.0 + std::sqrt(8.0), n);
  d = (d + 1.0 / d) / 2.0;
  double b = -1.0;
  double c = -d;
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    c = b - c;
    s += c * a[static_cast<std::size_t>(k)];
    b *= (static_cast<double>(k) + n) * (static_cast<double>(k) - n) /
         ((k + 0.5) * (k + 1.0));
  }
  return s / d;
}

void validate_parameters(const char* fn, double lambda, double hurst) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument(format_message(fn, "lambda must be positive", lambda));
  if (!(hurst > 0.0) || !(hurst < 1.0))
    throw InadmissibleRange(format_message(fn, "hurst must lie in (0,1)", hurst));
}

}  // namespace

double fou_stationary_covariance(double lambda, double hurst, double t) {
  validate_parameters("fou_stationary_covariance", lambda, hurst);
  if (!(t >= 0.0) || !std::isfinite(t))
    throw std::invalid_argument(
        format_message("fou_stationary_covariance", "time must be finite and >= 0", t));

  const double r0 = std::pow(lambda, -2.0 * hurst) * std::tgamma(2.0 * hurst + 1.0) / 2.0;
  if (t == 0.0) return r0;

  const double beta = 1.0 - 2.0 * hurst;  // ω-exponent of the spectral density
  const double norm = std::tgamma(2.0 * hurst + 1.0) *
                      std::sin(std::numbers::pi * hurst) / std::numbers::pi;
  const auto density = [&](double omega) {
    return std::pow(omega, beta) / (lambda * lambda + omega * omega);
  };
  const auto integrand = [&](double omega) { return std::cos(omega * t) * density(omega); };

  // Head up to the first cosine zero; single-signed, singularity at ω = 0.
  const double head_end = std::numbers::pi / (2.0 * t);
  boost::math::quadrature::tanh_sinh<double> head_rule;
  double head_rel_err = 0.0;
  double head_l1 = 0.0;
  const double head = head_rule.integrate(integrand, 0.0, head_end, 1e-12,
                                          &head_rel_err, &head_l1);
  double estimate = head_rel_err * std::max(head_l1, std::abs(head));

  // Half-period panels; the envelope ω^{1−2H}/(λ²+ω²) peaks at
  // ω* = λ√(β/(2−β)) when H < 1/2 and is decreasing from 0 otherwise.
  using panel_rule = boost::math::quadrature::gauss<double, 31>;
  const double half_period = std::numbers::pi / t;
  const double peak = beta > 0.0 ? lambda * std::sqrt(beta / (2.0 - beta)) : 0.0;

  double direct = 0.0;
  std::size_t k = 0;
  while (head_end + static_cast<double>(k) * half_period < peak) {
    const double lo = head_end + static_cast<double>(k) * half_period;
    direct += panel_rule::integrate(integrand, lo, lo + half_period);
    ++k;
  }

  // Past the peak the panel values alternate in sign, (−1)^{k+1}|s_k|.
  std::vector<double> magnitudes(kAccelerationTerms);
  for (int j = 0; j < kAccelerationTerms; ++j) {
    const double lo = head_end + static_cast<double>(k + j) * half_period;
    const double value = panel_rule::integrate(integrand, lo, lo + half_period);
    magnitudes[static_cast<std::size_t>(j)] = (k + j) % 2 == 0 ? -value : value;
  }
  const double accelerated = alternating_sum(magnitudes, kAccelerationTerms);
  const double check = alternating_sum(magnitudes, kAccelerationTerms - 2);
  const double tail = (k % 2 == 0 ? -1.0 : 1.0) * accelerated;
  estimate += std::abs(accelerated - check);

  if (estimate > kAbsoluteTol)
    throw QuadratureFailure(format_message(
        "fou_stationary_covariance", "error estimate above 1e-9", estimate));

  return norm * (head + direct + tail);
}

metrics::GaussianLaw fou_marginal_law(double lambda, double hurst, double epsilon,
                                      double x, double t) {
  validate_parameters("fou_marginal_law", lambda, hurst);
  if (!(epsilon > 0.0))
    throw std::invalid_argument(
        format_message("fou_marginal_law", "epsilon must be positive", epsilon));
  if (!(t >= 0.0))
    throw std::invalid_argument(
        format_message("fou_marginal_law", "time must be >= 0", t));

  metrics::GaussianLaw law;
  law.mean.resize(1);
  law.covariance.resize(1, 1);

  const double r0 = fou_stationary_covariance(lambda, hurst, 0.0);
  if (std::isinf(t)) {
    law.mean[0] = 0.0;
    law.covariance(0, 0) = epsilon * epsilon * r0;
    return law;
  }

  law.mean[0] = std::exp(-lambda * t) * x;
  if (t == 0.0) {
    law.covariance(0, 0) = 0.0;
    return law;
  }
  const double rt = fou_stationary_covariance(lambda, hurst, t);
  const double decay = std::exp(-lambda * t);
  // Var S_t = R(0) + e^{−2λt}R(0) − 2e^{−λt}R(t), from S_t = U_t − e^{−λt}U_0.
  const double variance = r0 * (1.0 + decay * decay) - 2.0 * decay * rt;
  law.covariance(0, 0) = epsilon * epsilon * std::max(0.0, variance);
  return law;
}

}  // namespace cutofflab::simulate
