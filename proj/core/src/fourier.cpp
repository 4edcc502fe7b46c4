#include "gridgen/fourier.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

namespace gridgen {

namespace {
// The FFTW planner is a process-wide mutable structure.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  int n = 0;
  double* real_buf = nullptr;
  fftw_complex* cplx_buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  explicit Impl(int length) : n(length) {
    if (n <= 0) fail_input("transform length must be positive");
    real_buf = fftw_alloc_real(static_cast<std::size_t>(n));
    cplx_buf = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(n, real_buf, cplx_buf, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_1d(n, cplx_buf, real_buf, FFTW_ESTIMATE);
  }

  ~Impl() {
    if (fwd || bwd) {
      std::lock_guard<std::mutex> lock(planner_mutex());
      if (fwd) fftw_destroy_plan(fwd);
      if (bwd) fftw_destroy_plan(bwd);
    }
    fftw_free(real_buf);
    fftw_free(cplx_buf);
  }
};

RealFft::RealFft(int length) : impl_(std::make_unique<Impl>(length)) {}
RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

int RealFft::length() const { return impl_->n; }
int RealFft::bins() const { return impl_->n / 2 + 1; }
bool RealFft::has_nyquist() const { return impl_->n % 2 == 0; }

CVec RealFft::forward(const Vec& x) const {
  if (static_cast<int>(x.size()) != impl_->n)
    fail_input("forward transform: length mismatch");
  std::memcpy(impl_->real_buf, x.data(), sizeof(double) * x.size());
  fftw_execute(impl_->fwd);
  CVec out(bins());
  // std::complex<double> is layout-compatible with double[2].
  std::memcpy(reinterpret_cast<double*>(out.data()), impl_->cplx_buf,
              sizeof(fftw_complex) * bins());
  return out;
}

Vec RealFft::inverse(const CVec& spectrum) const {
  if (static_cast<int>(spectrum.size()) != bins())
    fail_input("inverse transform: bin count mismatch");
  // c2r destroys its input, so the copy below is also a safeguard.
  std::memcpy(impl_->cplx_buf, spectrum.data(), sizeof(fftw_complex) * bins());
  fftw_execute(impl_->bwd);
  Vec out(impl_->n);
  for (int t = 0; t < impl_->n; ++t)
    out[t] = impl_->real_buf[t] / static_cast<double>(impl_->n);
  return out;
}

}  // namespace gridgen
