#pragma once

#include "gridgen/common.hpp"
#include "gridgen/rng.hpp"

#include <vector>

namespace gridgen {

// Periodic marginal-cost perturbation: a superposition of 19 harmonics
// (10 annual, 6 weekly, 3 daily) with standard-normal amplitudes and
// uniform phases, normalized so the ensemble variance at scale 1 is one.
struct CostNoise {
  Vec amplitudes;  // one per harmonic
  Vec phases;
  double scale = 1.0;

  // Per-hour frequencies: i/(24*364) for i=1..10, i/(24*7) for i=1..6,
  // i/24 for i=1..3.
  static const std::vector<double>& frequencies();

  static CostNoise draw(RngStream& rng, double scale = 1.0);

  double value(double t_hours) const;
  Vec series(int steps) const;  // values at t = 0..steps-1
};

}  // namespace gridgen
