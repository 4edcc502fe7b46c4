#pragma once

#include "gridgen/common.hpp"

#include <memory>

namespace gridgen {

// Real-input discrete Fourier transform of fixed length.
//
// forward() returns the unnormalized half spectrum (length n/2 + 1 for even
// n): bin 0 is the sum over the series, the last bin is the Nyquist
// component for even n. inverse() applies the 1/n normalization, so
// inverse(forward(x)) == x up to rounding.
//
// An instance owns its transform plans and scratch buffers; create one
// instance per thread for concurrent use.
class RealFft {
 public:
  explicit RealFft(int length);
  ~RealFft();

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  CVec forward(const Vec& x) const;
  Vec inverse(const CVec& spectrum) const;

  int length() const;
  int bins() const;         // length/2 + 1
  bool has_nyquist() const; // length is even

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gridgen
