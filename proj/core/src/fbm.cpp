/*
 * Circulant-embedding sampler for fractional Gaussian noise.
 *
 * With M = 2N and the symmetric circulant row c = (γ0,…,γN,γ_{N−1},…,γ1),
 * the DFT eigenvalues λ_k are real.  Drawing
 *
 *     Y_0 = √(λ_0/M)·ξ,   Y_{M/2} = √(λ_{M/2}/M)·ξ',
 *     Y_k = √(λ_k/(2M))·(ξ_k + i·η_k),   Y_{M−k} = conj(Y_k),
 *
 * and applying one forward DFT gives real outputs X_j with
 * E[X_j X_l] = c_{(j−l) mod M} = γ(|j−l|) for |j−l| ≤ N: the first N entries
 * are an exact fGn sample.  Tiny negative eigenvalues (roundoff) are clamped;
 * genuinely indefinite embeddings fall back to a dense Cholesky factor.
 */

#include "fbm_sampler.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <string>

#include <Eigen/Cholesky>
#include <fftw3.h>

#include "cutofflab/errors.hpp"
#include "fftw_guard.hpp"

namespace cutofflab::simulate::detail {

namespace {

constexpr double kEigenvalueTol = 1e-10;

// One cached in-place forward plan per transform size; FFTW planning is not
// thread-safe, execution on distinct arrays is.
fftw_plan plan_for_size(std::size_t m) {
  static std::map<std::size_t, fftw_plan>* cache = new std::map<std::size_t, fftw_plan>();
  std::lock_guard<std::mutex> lock(cutofflab::detail::fftw_planner_mutex());
  auto it = cache->find(m);
  if (it != cache->end()) return it->second;
  fftw_complex* scratch = fftw_alloc_complex(m);
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(m), scratch, scratch,
                                    FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_free(scratch);
  (*cache)[m] = plan;
  return plan;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t m) : data(fftw_alloc_complex(m)) {}
  ~FftwBuffer() { fftw_free(data); }
  fftw_complex* data;
};

// γ(k) for unit-variance-per-step-h fGn.
double fgn_covariance(double hurst, double step, std::size_t k) {
  const double two_h = 2.0 * hurst;
  const double kk = static_cast<double>(k);
  const double shape = 0.5 * (std::pow(kk + 1.0, two_h) - 2.0 * std::pow(kk, two_h) +
                              std::pow(std::abs(kk - 1.0), two_h));
  return std::pow(step, two_h) * shape;
}

}  // namespace

FbmIncrementSampler::FbmIncrementSampler(double hurst, double step,
                                         std::size_t n_increments)
    : n_(n_increments) {
  const std::size_t m = 2 * n_;

  std::vector<double> gamma(n_ + 1);
  for (std::size_t k = 0; k <= n_; ++k) gamma[k] = fgn_covariance(hurst, step, k);

  // Eigenvalues of the symmetric circulant with row (γ0,…,γN,γ_{N−1},…,γ1).
  FftwBuffer row(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t lag = k <= n_ ? k : m - k;
    row.data[k][0] = gamma[lag];
    row.data[k][1] = 0.0;
  }
  fftw_execute_dft(plan_for_size(m), row.data, row.data);

  double max_eig = 0.0;
  double min_eig = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    max_eig = std::max(max_eig, row.data[k][0]);
    min_eig = std::min(min_eig, row.data[k][0]);
  }

  if (min_eig >= -kEigenvalueTol * std::max(1.0, max_eig)) {
    spectral_scale_.resize(m);
    const double dm = static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double eig = std::max(0.0, row.data[k][0]);
      const double variance = (k == 0 || k == n_) ? eig / dm : eig / (2.0 * dm);
      spectral_scale_[k] = std::sqrt(variance);
    }
    return;
  }

  // Indefinite embedding: factor the Toeplitz increment covariance directly.
  Eigen::MatrixXd toeplitz(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      toeplitz(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          gamma[i >= j ? i - j : j - i];
  Eigen::LLT<Eigen::MatrixXd> llt(toeplitz);
  if (llt.info() != Eigen::Success)
    throw EmbeddingFailure(
        "FbmIncrementSampler: circulant embedding indefinite (min eigenvalue " +
        std::to_string(min_eig) + ") and Cholesky of the Toeplitz covariance failed");
  cholesky_ = llt.matrixL();
  use_cholesky_ = true;
}

FbmIncrementSampler::~FbmIncrementSampler() = default;

void FbmIncrementSampler::draw(Rng& rng, Eigen::VectorXd& increments) const {
  increments.resize(static_cast<Eigen::Index>(n_));

  if (use_cholesky_) {
    Eigen::VectorXd normals(static_cast<Eigen::Index>(n_));
    for (Eigen::Index i = 0; i < normals.size(); ++i) normals[i] = rng.normal();
    increments.noalias() = cholesky_ * normals;
    return;
  }

  const std::size_t m = 2 * n_;
  FftwBuffer buf(m);
  buf.data[0][0] = spectral_scale_[0] * rng.normal();
  buf.data[0][1] = 0.0;
  buf.data[n_][0] = spectral_scale_[n_] * rng.normal();
  buf.data[n_][1] = 0.0;
  for (std::size_t k = 1; k < n_; ++k) {
    const double re = spectral_scale_[k] * rng.normal();
    const double im = spectral_scale_[k] * rng.normal();
    buf.data[k][0] = re;
    buf.data[k][1] = im;
    buf.data[m - k][0] = re;
    buf.data[m - k][1] = -im;
  }
  fftw_execute_dft(plan_for_size(m), buf.data, buf.data);
  for (std::size_t j = 0; j < n_; ++j)
    increments[static_cast<Eigen::Index>(j)] = buf.data[j][0];
}

}  // namespace cutofflab::simulate::detail
