#pragma once

#include "gridgen/common.hpp"
#include "gridgen/fourier.hpp"
#include "gridgen/rng.hpp"
#include "gridgen/series.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gridgen {

// Gaussian ensemble over annual series, parameterized in the half spectrum
// of the real-input transform: a complex mean per bin and a sparse Hermitian
// covariance between bins. Bin 0 and (for even length) the last bin carry
// real coefficients; their fluctuations are kept uncoupled from the complex
// bins so every sample transforms back to a real series.
struct FourierEnsemble {
  std::string region;
  int length = 0;  // time-domain steps
  CVec mu;         // length/2 + 1 bins, unnormalized transform units
  CMat centered_spectra;  // bins x years, retained until sparsification
  SpCMat sigma;           // Hermitian covariance between bins
  SpCMat factor;          // S with S S^H = sigma
  double rho_target = 0.0;
  bool has_sigma = false;
  bool has_factor = false;

  int bins() const { return length / 2 + 1; }
  bool has_nyquist() const { return length % 2 == 0; }
  bool is_real_bin(int k) const {
    return k == 0 || (has_nyquist() && k == bins() - 1);
  }
};

// Centered second-moment matrix across a set of equal-length series:
// M(t1,t2) = (1/N) sum_i x_i(t1) x_i(t2) - (1/N^2) sum_i x_i(t1) sum_j x_j(t2).
// Dense, intended for diagnostics at small sizes.
Mat time_covariance(const std::vector<Vec>& series);

// Sample mean and per-bin-pair sample covariance of the spectra of at least
// two equal-length series (normalization 1/N, matching time_covariance).
FourierEnsemble fit_ensemble(const std::vector<Vec>& series,
                             const std::string& region);
FourierEnsemble fit_ensemble(const std::vector<AnnualSeries>& years,
                             const std::string& region);

// Materializes sigma, zeroing every off-diagonal entry with magnitude below
// threshold_fraction * max(diagonal). When entries were dropped, positive
// semidefiniteness is restored by clipping negative eigenvalues to zero on
// each connected block of the sparsity pattern; blocks larger than
// max_repair_block fall back to diagonal loading of 1e-10 * max(diagonal).
// Invalidates any existing factor.
void sparsify_covariance(FourierEnsemble& ens, double threshold_fraction,
                         int max_repair_block = 512);

struct CovStats {
  double var_mu = 0.0;     // time-domain variance of the mean profile
  double var_sigma = 0.0;  // mean marginal variance minus variance of the mean
};

CovStats covariance_stats(const FourierEnsemble& ens);

// Expected Pearson coefficient between two independent draws,
// var_mu / (var_mu + var_sigma).
double expected_pair_correlation(const FourierEnsemble& ens);

// Scales sigma by k = var_mu * (1 - rho_target) / (rho_target * var_sigma)
// so that expected_pair_correlation becomes exactly rho_target. Returns k.
// A degenerate ensemble (var_sigma == 0) is reported and left unscaled.
double tune_correlation(FourierEnsemble& ens, double rho_target);

// Block-wise Cholesky of sigma; blocks that are only semidefinite use the
// eigenvalue square root with negative directions zeroed. Throws if sigma
// is indefinite beyond tolerance or couples a real bin to other bins.
void factorize(FourierEnsemble& ens);

// One draw in spectrum space: mu + S xi with xi standard normal per bin
// (real bins: unit variance; complex bins: independent real and imaginary
// parts of variance one half each).
CVec sample_spectrum(const FourierEnsemble& ens, RngStream& rng);

// Inverse-transforms a spectrum draw to the time domain.
Vec sample_series(const FourierEnsemble& ens, RngStream& rng);

// Reusable sampler holding the transform plan; cheaper in loops.
class EnsembleSampler {
 public:
  explicit EnsembleSampler(const FourierEnsemble& ens);
  Vec sample(RngStream& rng) const;
  const FourierEnsemble& ensemble() const { return *ens_; }

 private:
  const FourierEnsemble* ens_;
  RealFft fft_;
};

// Plain-text persistence (spectrum arrays and sparse triplets).
void write_ensemble(const std::filesystem::path& file,
                    const FourierEnsemble& ens);
FourierEnsemble read_ensemble(const std::filesystem::path& file);

}  // namespace gridgen
