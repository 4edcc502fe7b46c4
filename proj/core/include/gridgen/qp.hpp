#pragma once

#include "gridgen/common.hpp"

#include <string>

namespace gridgen {

// Convex quadratic program
//   min 0.5 x'Hx + g'x   s.t.  A x = b,  C x <= d,
// with H symmetric positive semidefinite (stored fully).
struct QpProblem {
  SpMat H;
  Vec g;
  SpMat A;
  Vec b;
  SpMat C;
  Vec d;

  int n() const { return static_cast<int>(g.size()); }
  int n_eq() const { return static_cast<int>(b.size()); }
  int n_in() const { return static_cast<int>(d.size()); }
  double objective(const Vec& x) const;
};

struct QpSettings {
  double tolerance = 1e-9;  // relative KKT residual target
  int max_iterations = 100;
  bool verbose = false;
};

struct QpSolution {
  Vec x;
  Vec y;  // equality multipliers
  Vec z;  // inequality multipliers, >= 0
  double objective = 0.0;
  double kkt_residual = 0.0;  // relative, as achieved
  int iterations = 0;
  bool converged = false;
};

// Primal-dual interior-point method (Mehrotra predictor-corrector) with a
// sparse LU factorization of the reduced KKT system. Deterministic: no
// randomized choices, fixed iteration order.
QpSolution solve_qp(const QpProblem& qp, const QpSettings& settings = {});

// Residuals of the first-order optimality conditions at (x, y, z),
// recomputed from the problem data alone.
struct KktResiduals {
  double stationarity = 0.0;    // |Hx + g + A'y + C'z| (relative)
  double eq_feasibility = 0.0;  // |Ax - b| (relative)
  double in_feasibility = 0.0;  // |max(Cx - d, 0)| (relative)
  double dual_sign = 0.0;       // |min(z, 0)|
  double complementarity = 0.0; // |z .* (d - Cx)| (relative)
  double max_residual() const;
};

KktResiduals kkt_residuals(const QpProblem& qp, const Vec& x, const Vec& y,
                           const Vec& z);

}  // namespace gridgen
