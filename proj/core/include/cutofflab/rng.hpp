#pragma once

/*
 * Deterministic random number generation.
 *
 * xoshiro256++ streams seeded through splitmix64, with explicit Box–Muller
 * normals and inverse-transform exponentials.  The standard library's
 * distributions are implementation-defined, which would break the bit-exact
 * reproducibility contract (same seed ⇒ same ensemble, on any toolchain and
 * any thread count), so the few transforms needed are spelled out here.
 *
 * Stream identity is structural: stream_for(seed, id₀, id₁, …) hashes the ids
 * into the seed, so path k of ensemble e always draws the same variates no
 * matter which thread computes it.
 */

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cutofflab {

// ── splitmix64 ────────────────────────────────────────────────────────────────

// Weyl-sequence generator; used for seeding and for hashing stream ids.
struct SplitMix64 {
  std::uint64_t state;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

// ── xoshiro256++ ──────────────────────────────────────────────────────────────

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    SplitMix64 sm{seed};
    for (auto& w : s_) w = sm.next();
    have_cached_ = false;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0,1): top 53 bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box–Muller; the sine variate is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    // 1−u ∈ (0,1] keeps the logarithm finite.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    have_cached_ = true;
    return radius * std::cos(angle);
  }

  // Exponential with unit mean.
  double exponential() { return -std::log1p(-uniform01()); }

  // Symmetric α-stable variate with E exp(izX) = exp(−|z|^α), α ∈ (0,2].
  // Chambers–Mallows–Stuck construction from a uniform angle and an
  // independent exponential.
  double stable(double alpha) {
    const double u = std::numbers::pi * (uniform01() - 0.5);
    const double e = exponential();
    if (alpha == 2.0) {
      // Degenerate CMS limit: N(0,2) (matches the CF exp(−z²)).
      return 2.0 * std::sqrt(e) * std::sin(u);
    }
    const double inv_alpha = 1.0 / alpha;
    const double factor = std::sin(alpha * u) / std::pow(std::cos(u), inv_alpha);
    const double tail =
        std::pow(std::cos((1.0 - alpha) * u) / e, (1.0 - alpha) * inv_alpha);
    return factor * tail;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool have_cached_;
};

// ── stream derivation ─────────────────────────────────────────────────────────

namespace detail {
inline std::uint64_t fold_stream_id(std::uint64_t acc, std::uint64_t id) {
  SplitMix64 sm{acc ^ (id + 0x9E3779B97F4A7C15ULL)};
  return sm.next();
}
}  // namespace detail

// Independent stream keyed by (seed, id₀, id₁, …).
template <class... Ids>
Rng stream_for(std::uint64_t seed, Ids... ids) {
  std::uint64_t acc = seed;
  ((acc = detail::fold_stream_id(acc, static_cast<std::uint64_t>(ids))), ...);
  return Rng(acc);
}

}  // namespace cutofflab
