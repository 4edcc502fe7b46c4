#include "gridgen/ensemble.hpp"

#include "gridgen/log.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace gridgen {

Mat time_covariance(const std::vector<Vec>& series) {
  const int n = static_cast<int>(series.size());
  if (n < 2) fail_input("time covariance needs at least two series");
  const Eigen::Index T = series[0].size();
  for (const auto& s : series)
    if (s.size() != T) fail_input("time covariance: length mismatch");

  Mat stacked(T, n);
  for (int i = 0; i < n; ++i) stacked.col(i) = series[i];
  const Vec mean = stacked.rowwise().mean();
  Mat cov = stacked * stacked.transpose() / static_cast<double>(n);
  cov -= mean * mean.transpose();
  return cov;
}

FourierEnsemble fit_ensemble(const std::vector<Vec>& series,
                             const std::string& region) {
  const int n = static_cast<int>(series.size());
  if (n < 2) fail_input("ensemble fit needs at least two years for " + region);
  const int T = static_cast<int>(series[0].size());
  for (const auto& s : series)
    if (static_cast<int>(s.size()) != T)
      fail_input("ensemble fit: length mismatch for " + region);

  RealFft fft(T);
  FourierEnsemble ens;
  ens.region = region;
  ens.length = T;
  CMat spectra(fft.bins(), n);
  for (int i = 0; i < n; ++i) spectra.col(i) = fft.forward(series[i]);
  ens.mu = spectra.rowwise().mean();
  ens.centered_spectra = spectra.colwise() - ens.mu;
  return ens;
}

FourierEnsemble fit_ensemble(const std::vector<AnnualSeries>& years,
                             const std::string& region) {
  std::vector<Vec> series;
  series.reserve(years.size());
  for (const auto& y : years) series.push_back(y.values);
  return fit_ensemble(series, region);
}

namespace {

// Connected components of the (symmetric) sparsity pattern via union-find.
std::vector<std::vector<int>> pattern_blocks(const SpCMat& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int> rank(n, 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank[a] < rank[b]) std::swap(a, b);
    parent[b] = a;
    if (rank[a] == rank[b]) ++rank[a];
  };
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpCMat::InnerIterator it(m, k); it; ++it)
      if (it.row() != it.col()) unite(static_cast<int>(it.row()),
                                      static_cast<int>(it.col()));
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

CMat dense_block(const SpCMat& m, const std::vector<int>& idx) {
  CMat block = CMat::Zero(idx.size(), idx.size());
  std::map<int, int> pos;
  for (int i = 0; i < static_cast<int>(idx.size()); ++i) pos[idx[i]] = i;
  for (int j : idx) {
    for (SpCMat::InnerIterator it(m, j); it; ++it) {
      const auto r = pos.find(static_cast<int>(it.row()));
      if (r != pos.end()) block(r->second, pos[j]) = it.value();
    }
  }
  return block;
}

}  // namespace

void sparsify_covariance(FourierEnsemble& ens, double threshold_fraction,
                         int max_repair_block) {
  if (ens.centered_spectra.size() == 0 && !ens.has_sigma)
    fail_input("ensemble for " + ens.region + " has not been fitted");
  if (threshold_fraction < 0.0) fail_input("sparsify threshold must be >= 0");
  if (!ens.centered_spectra.size())
    fail_input("covariance already materialized; refit to re-sparsify");

  const CMat& D = ens.centered_spectra;
  const int F = static_cast<int>(D.rows());
  const double n = static_cast<double>(D.cols());

  Vec diag(F), norms(F);
  for (int k = 0; k < F; ++k) {
    const double sq = D.row(k).squaredNorm();
    diag[k] = sq / n;
    norms[k] = std::sqrt(sq);
  }
  const double max_diag = diag.maxCoeff();
  const double cutoff = threshold_fraction * max_diag;

  std::vector<CTriplet> trip;
  for (int k = 0; k < F; ++k)
    trip.emplace_back(k, k, Complex(diag[k], 0.0));

  // Couplings to the real-valued bins are always discarded: that is a
  // principal-submatrix restriction, so it cannot break semidefiniteness,
  // and it keeps every sampled coefficient of those bins real.
  bool dropped = false;
  for (int k = 0; k < F && max_diag > 0.0; ++k) {
    if (ens.is_real_bin(k)) continue;
    for (int l = k + 1; l < F; ++l) {
      if (ens.is_real_bin(l)) continue;
      // Cauchy-Schwarz prefilter: |sigma_kl| <= |d_k||d_l| / n. Exact zeros
      // are never stored.
      const double bound = norms[k] * norms[l] / n;
      if (bound == 0.0) continue;
      if (bound < cutoff) {
        dropped = true;
        continue;
      }
      const Complex v = (D.row(k).array() * D.row(l).array().conjugate()).sum() / n;
      if (std::abs(v) == 0.0) continue;
      if (std::abs(v) < cutoff) {
        dropped = true;
        continue;
      }
      trip.emplace_back(k, l, v);
      trip.emplace_back(l, k, std::conj(v));
    }
  }

  ens.sigma.resize(F, F);
  ens.sigma.setFromTriplets(trip.begin(), trip.end());
  ens.has_sigma = true;
  ens.has_factor = false;
  ens.factor.resize(0, 0);
  ens.centered_spectra.resize(0, 0);

  if (!dropped || max_diag <= 0.0) return;

  // Thresholding can push small eigenvalues below zero; repair per block.
  const auto blocks = pattern_blocks(ens.sigma);
  std::vector<CTriplet> repaired;
  bool any_clip = false;
  for (const auto& idx : blocks) {
    if (idx.size() == 1) {
      const int k = idx[0];
      repaired.emplace_back(k, k, Complex(std::max(diag[k], 0.0), 0.0));
      continue;
    }
    if (static_cast<int>(idx.size()) > max_repair_block) {
      log_warn("covariance block of " + std::to_string(idx.size()) +
               " bins exceeds the repair limit; applying diagonal loading");
      CMat block = dense_block(ens.sigma, idx);
      block.diagonal().array() += 1e-10 * max_diag;
      for (int i = 0; i < block.rows(); ++i)
        for (int j = 0; j < block.cols(); ++j)
          if (block(i, j) != Complex(0, 0) || i == j)
            repaired.emplace_back(idx[i], idx[j], block(i, j));
      continue;
    }
    CMat block = dense_block(ens.sigma, idx);
    Eigen::SelfAdjointEigenSolver<CMat> eig(block);
    if (eig.eigenvalues().minCoeff() >= 0.0) {
      for (int i = 0; i < block.rows(); ++i)
        for (int j = 0; j < block.cols(); ++j)
          if (block(i, j) != Complex(0, 0))
            repaired.emplace_back(idx[i], idx[j], block(i, j));
      continue;
    }
    any_clip = true;
    Vec vals = eig.eigenvalues().cwiseMax(0.0);
    CMat rebuilt =
        eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().adjoint();
    // The clipped block is kept in full: projecting it back onto the old
    // sparsity pattern could turn it indefinite again. Fill stays confined
    // to the block.
    for (int i = 0; i < rebuilt.rows(); ++i) {
      for (int j = 0; j < rebuilt.cols(); ++j) {
        Complex v = rebuilt(i, j);
        if (i == j) v = Complex(std::max(v.real(), 0.0), 0.0);
        if (i == j || v != Complex(0, 0))
          repaired.emplace_back(idx[i], idx[j], v);
      }
    }
  }
  if (any_clip) log_debug("clipped negative covariance eigenvalues to zero");
  ens.sigma.setFromTriplets(repaired.begin(), repaired.end());
}

CovStats covariance_stats(const FourierEnsemble& ens) {
  if (ens.length <= 0) fail_input("ensemble has no fitted length");
  const double T = static_cast<double>(ens.length);

  CovStats st;
  {
    RealFft fft(ens.length);
    const Vec mean_profile = fft.inverse(ens.mu);
    const double m = mean_profile.mean();
    st.var_mu = (mean_profile.array() - m).square().sum() / T;
  }

  Vec diag;
  if (ens.has_sigma) {
    diag = ens.sigma.diagonal().real();
  } else if (ens.centered_spectra.size()) {
    diag.resize(ens.bins());
    for (int k = 0; k < ens.bins(); ++k)
      diag[k] = ens.centered_spectra.row(k).squaredNorm() /
                static_cast<double>(ens.centered_spectra.cols());
  } else {
    fail_input("ensemble has no covariance information");
  }

  // Mean marginal variance minus the variance of the series mean, evaluated
  // in spectrum space: the bin-0 contribution cancels exactly and each
  // complex bin counts twice (its mirror image).
  double acc = 0.0;
  for (int k = 1; k < ens.bins(); ++k)
    acc += ens.is_real_bin(k) ? diag[k] : 2.0 * diag[k];
  st.var_sigma = acc / (T * T);
  return st;
}

double expected_pair_correlation(const FourierEnsemble& ens) {
  const CovStats st = covariance_stats(ens);
  const double den = st.var_mu + st.var_sigma;
  if (den <= 0.0) fail_input("ensemble has zero total variance");
  return st.var_mu / den;
}

double tune_correlation(FourierEnsemble& ens, double rho_target) {
  if (!(rho_target > 0.0 && rho_target < 1.0))
    fail_input("correlation target must lie strictly between 0 and 1");
  if (!ens.has_sigma)
    fail_input("sparsify the covariance before tuning " + ens.region);
  const CovStats st = covariance_stats(ens);
  if (!(st.var_mu > 0.0))
    fail_input("mean profile of " + ens.region + " has zero variance");
  if (st.var_sigma <= 0.0) {
    log_warn("ensemble for " + ens.region +
             " is degenerate (zero spectral variance); leaving it unscaled");
    ens.rho_target = rho_target;
    return 1.0;
  }
  const double k =
      st.var_mu * (1.0 - rho_target) / (rho_target * st.var_sigma);
  ens.sigma *= k;
  ens.rho_target = rho_target;
  ens.has_factor = false;
  ens.factor.resize(0, 0);
  return k;
}

void factorize(FourierEnsemble& ens) {
  if (!ens.has_sigma) fail_input("sparsify the covariance before factorizing");
  const int F = static_cast<int>(ens.sigma.rows());
  const double max_diag = std::max(ens.sigma.diagonal().real().maxCoeff(), 0.0);
  const double neg_tol = 1e-8 * std::max(max_diag, 1e-300);

  std::vector<CTriplet> trip;
  const auto blocks = pattern_blocks(ens.sigma);
  for (const auto& idx : blocks) {
    if (idx.size() == 1) {
      const int k = idx[0];
      const double v = ens.sigma.coeff(k, k).real();
      if (v < -neg_tol)
        fail_input("covariance is indefinite at bin " + std::to_string(k));
      if (v > 0.0) trip.emplace_back(k, k, Complex(std::sqrt(v), 0.0));
      continue;
    }
    for (int k : idx)
      if (ens.is_real_bin(k))
        fail_input("covariance couples a real-valued bin; sparsify first");
    CMat block = dense_block(ens.sigma, idx);
    Eigen::LLT<CMat> llt(block);
    if (llt.info() == Eigen::Success) {
      const CMat L = llt.matrixL();
      for (int j = 0; j < L.cols(); ++j)
        for (int i = j; i < L.rows(); ++i)
          if (L(i, j) != Complex(0, 0)) trip.emplace_back(idx[i], idx[j], L(i, j));
      continue;
    }
    // Semidefinite block: square root with null directions zeroed.
    Eigen::SelfAdjointEigenSolver<CMat> eig(block);
    if (eig.eigenvalues().minCoeff() < -neg_tol)
      fail_input("covariance block is indefinite; re-run sparsification");
    Vec vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    CMat S = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().adjoint();
    for (int i = 0; i < S.rows(); ++i)
      for (int j = 0; j < S.cols(); ++j)
        if (std::abs(S(i, j)) > 0.0) trip.emplace_back(idx[i], idx[j], S(i, j));
  }
  ens.factor.resize(F, F);
  ens.factor.setFromTriplets(trip.begin(), trip.end());
  ens.has_factor = true;
}

CVec sample_spectrum(const FourierEnsemble& ens, RngStream& rng) {
  if (!ens.has_factor) fail_input("factorize the ensemble before sampling");
  const int F = ens.bins();
  static constexpr double kHalfSd = 0.70710678118654752440;  // sqrt(1/2)
  CVec xi(F);
  for (int k = 0; k < F; ++k) {
    if (ens.is_real_bin(k)) {
      xi[k] = Complex(rng.normal(), 0.0);
    } else {
      xi[k] = Complex(rng.normal() * kHalfSd, rng.normal() * kHalfSd);
    }
  }
  CVec out = ens.mu + ens.factor * xi;
  // Real bins carry real coefficients by construction.
  out[0] = Complex(out[0].real(), 0.0);
  if (ens.has_nyquist()) out[F - 1] = Complex(out[F - 1].real(), 0.0);
  return out;
}

Vec sample_series(const FourierEnsemble& ens, RngStream& rng) {
  RealFft fft(ens.length);
  return fft.inverse(sample_spectrum(ens, rng));
}

EnsembleSampler::EnsembleSampler(const FourierEnsemble& ens)
    : ens_(&ens), fft_(ens.length) {}

Vec EnsembleSampler::sample(RngStream& rng) const {
  return fft_.inverse(sample_spectrum(*ens_, rng));
}

namespace {

void write_complex(std::ostream& os, const Complex& v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g", v.real(), v.imag());
  os << buf;
}

}  // namespace

void write_ensemble(const std::filesystem::path& file,
                    const FourierEnsemble& ens) {
  if (!ens.has_sigma)
    fail_input("ensemble for " + ens.region + " has no materialized covariance");
  std::ofstream out(file, std::ios::binary);
  if (!out) fail_input("cannot write " + file.string());
  out << "gridgen-ensemble 1\n";
  out << "region " << ens.region << "\n";
  out << "length " << ens.length << "\n";
  out << "rho_target ";
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", ens.rho_target);
    out << buf << "\n";
  }
  out << "mu " << ens.bins() << "\n";
  for (int k = 0; k < ens.bins(); ++k) {
    write_complex(out, ens.mu[k]);
    out << "\n";
  }
  // Upper triangle (column-major scan keeps the file deterministic).
  std::vector<std::tuple<int, int, Complex>> entries;
  for (int j = 0; j < ens.sigma.outerSize(); ++j)
    for (SpCMat::InnerIterator it(ens.sigma, j); it; ++it)
      if (it.row() <= it.col())
        entries.emplace_back(static_cast<int>(it.row()),
                             static_cast<int>(it.col()), it.value());
  out << "sigma " << entries.size() << "\n";
  for (const auto& [r, c, v] : entries) {
    out << r << " " << c << " ";
    write_complex(out, v);
    out << "\n";
  }
  entries.clear();
  if (ens.has_factor) {
    for (int j = 0; j < ens.factor.outerSize(); ++j)
      for (SpCMat::InnerIterator it(ens.factor, j); it; ++it)
        entries.emplace_back(static_cast<int>(it.row()),
                             static_cast<int>(it.col()), it.value());
  }
  out << "factor " << entries.size() << "\n";
  for (const auto& [r, c, v] : entries) {
    out << r << " " << c << " ";
    write_complex(out, v);
    out << "\n";
  }
  out << "end\n";
  if (!out) fail_input("short write to " + file.string());
}

FourierEnsemble read_ensemble(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail_input("cannot open ensemble file " + file.string());
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "gridgen-ensemble" || version != 1)
    fail_input(file.string() + " is not an ensemble file");

  FourierEnsemble ens;
  in >> tag >> ens.region;
  if (tag != "region") fail_input("ensemble file: expected 'region'");
  in >> tag >> ens.length;
  if (tag != "length" || ens.length <= 0)
    fail_input("ensemble file: bad 'length'");
  in >> tag >> ens.rho_target;
  if (tag != "rho_target") fail_input("ensemble file: expected 'rho_target'");

  int nbins = 0;
  in >> tag >> nbins;
  if (tag != "mu" || nbins != ens.bins())
    fail_input("ensemble file: bin count does not match length");
  ens.mu.resize(nbins);
  for (int k = 0; k < nbins; ++k) {
    double re = 0, im = 0;
    in >> re >> im;
    ens.mu[k] = Complex(re, im);
  }

  std::size_t nnz = 0;
  in >> tag >> nnz;
  if (tag != "sigma") fail_input("ensemble file: expected 'sigma'");
  std::vector<CTriplet> trip;
  trip.reserve(2 * nnz);
  for (std::size_t i = 0; i < nnz; ++i) {
    int r = 0, c = 0;
    double re = 0, im = 0;
    in >> r >> c >> re >> im;
    trip.emplace_back(r, c, Complex(re, im));
    if (r != c) trip.emplace_back(c, r, Complex(re, -im));
  }
  ens.sigma.resize(nbins, nbins);
  ens.sigma.setFromTriplets(trip.begin(), trip.end());
  ens.has_sigma = true;

  in >> tag >> nnz;
  if (tag != "factor") fail_input("ensemble file: expected 'factor'");
  trip.clear();
  for (std::size_t i = 0; i < nnz; ++i) {
    int r = 0, c = 0;
    double re = 0, im = 0;
    in >> r >> c >> re >> im;
    trip.emplace_back(r, c, Complex(re, im));
  }
  ens.factor.resize(nbins, nbins);
  ens.factor.setFromTriplets(trip.begin(), trip.end());
  ens.has_factor = nnz > 0;

  in >> tag;
  if (tag != "end" || !in) fail_input("ensemble file: truncated");
  return ens;
}

}  // namespace gridgen
