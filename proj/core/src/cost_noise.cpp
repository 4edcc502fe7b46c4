#include "gridgen/cost_noise.hpp"

#include <cmath>
#include <numbers>

namespace gridgen {

const std::vector<double>& CostNoise::frequencies() {
  static const std::vector<double> freqs = [] {
    std::vector<double> f;
    for (int i = 1; i <= 10; ++i) f.push_back(i / (24.0 * 364.0));
    for (int i = 1; i <= 6; ++i) f.push_back(i / (24.0 * 7.0));
    for (int i = 1; i <= 3; ++i) f.push_back(i / 24.0);
    return f;
  }();
  return freqs;
}

CostNoise CostNoise::draw(RngStream& rng, double scale) {
  if (scale < 0.0) fail_input("noise scale must be >= 0");
  const int n = static_cast<int>(frequencies().size());
  CostNoise c;
  c.scale = scale;
  c.amplitudes.resize(n);
  c.phases.resize(n);
  for (int v = 0; v < n; ++v) {
    c.amplitudes[v] = rng.normal();
    c.phases[v] = rng.uniform_angle();
  }
  return c;
}

double CostNoise::value(double t_hours) const {
  const auto& freqs = frequencies();
  const int n = static_cast<int>(freqs.size());
  double acc = 0.0;
  for (int v = 0; v < n; ++v)
    acc += amplitudes[v] *
           std::cos(2.0 * std::numbers::pi * freqs[v] * t_hours + phases[v]);
  return scale * std::sqrt(2.0 / n) * acc;
}

Vec CostNoise::series(int steps) const {
  Vec out(steps);
  for (int t = 0; t < steps; ++t) out[t] = value(static_cast<double>(t));
  return out;
}

}  // namespace gridgen
