#pragma once

/*
 * Exact fractional Gaussian noise on a uniform grid.
 *
 * The N stationary increments of fractional Brownian motion with Hurst index
 * H over step h have Toeplitz covariance
 *
 *     γ(k) = (h^{2H}/2)·(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H}),
 *
 * embedded in a circulant of order M = 2N whose eigenvalues are the DFT of
 * the first row.  Conjugate-symmetric spectral draws followed by one forward
 * FFT give a sample with exactly this covariance; when the embedding is not
 * positive semidefinite, a dense Cholesky factor of the Toeplitz matrix is
 * used instead.
 */

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "cutofflab/rng.hpp"

namespace cutofflab::simulate::detail {

class FbmIncrementSampler {
 public:
  // Throws EmbeddingFailure when neither route yields a PSD covariance.
  FbmIncrementSampler(double hurst, double step, std::size_t n_increments);
  ~FbmIncrementSampler();

  FbmIncrementSampler(const FbmIncrementSampler&) = delete;
  FbmIncrementSampler& operator=(const FbmIncrementSampler&) = delete;

  // Fills `increments` (resized to n_increments) with one fGn draw.
  void draw(Rng& rng, Eigen::VectorXd& increments) const;

  std::size_t size() const { return n_; }
  bool uses_cholesky() const { return use_cholesky_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> spectral_scale_;  // √(λ_k/M) resp. √(λ_k/(2M))
  Eigen::MatrixXd cholesky_;            // lower factor, Cholesky route only
  bool use_cholesky_ = false;
};

}  // namespace cutofflab::simulate::detail
