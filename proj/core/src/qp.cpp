#include "gridgen/qp.hpp"

#include "gridgen/log.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace gridgen {

namespace {

double inf_norm(const Vec& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

// sup { a in [0, 1] : v + a * dv >= 0 } scaled by tau.
double step_to_boundary(const Vec& v, const Vec& dv, double tau) {
  double a = 1.0 / tau;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  return std::min(1.0, tau * a);
}

}  // namespace

double QpProblem::objective(const Vec& x) const {
  return 0.5 * x.dot(H * x) + g.dot(x);
}

double KktResiduals::max_residual() const {
  return std::max({stationarity, eq_feasibility, in_feasibility, dual_sign,
                   complementarity});
}

KktResiduals kkt_residuals(const QpProblem& qp, const Vec& x, const Vec& y,
                           const Vec& z) {
  KktResiduals r;
  const Vec Hx = qp.H * x;
  Vec lhs = Hx + qp.g;
  double dscale = 1.0 + std::max(inf_norm(Hx), inf_norm(qp.g));
  if (qp.n_eq()) {
    const Vec aty = qp.A.transpose() * y;
    lhs += aty;
    dscale = std::max(dscale, 1.0 + inf_norm(aty));
  }
  if (qp.n_in()) {
    const Vec ctz = qp.C.transpose() * z;
    lhs += ctz;
    dscale = std::max(dscale, 1.0 + inf_norm(ctz));
  }
  r.stationarity = inf_norm(lhs) / dscale;

  if (qp.n_eq()) {
    const Vec ax = qp.A * x;
    r.eq_feasibility =
        inf_norm(ax - qp.b) / (1.0 + std::max(inf_norm(ax), inf_norm(qp.b)));
  }
  if (qp.n_in()) {
    const Vec cx = qp.C * x;
    const Vec viol = (cx - qp.d).cwiseMax(0.0);
    const double pscale = 1.0 + std::max(inf_norm(cx), inf_norm(qp.d));
    r.in_feasibility = inf_norm(viol) / pscale;
    r.dual_sign = inf_norm(z.cwiseMin(0.0));
    const Vec slack = qp.d - cx;
    r.complementarity = inf_norm(z.cwiseProduct(slack)) /
                        (1.0 + std::abs(qp.objective(x)));
  }
  return r;
}

namespace {

class KktSystem {
 public:
  KktSystem(const QpProblem& qp, double rho, double delta)
      : qp_(qp), rho_(rho), delta_(delta), n_(qp.n()), me_(qp.n_eq()) {}

  void factorize(const Vec& scaling) {
    SpMat hbar = qp_.H;
    if (qp_.n_in()) {
      const SpMat ctdc =
          qp_.C.transpose() * scaling.asDiagonal() * qp_.C;
      hbar = hbar + ctdc;
    }

    std::vector<Triplet> trip;
    trip.reserve(hbar.nonZeros() + 2 * qp_.A.nonZeros() + n_ + me_);
    for (int j = 0; j < hbar.outerSize(); ++j)
      for (SpMat::InnerIterator it(hbar, j); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()),
                          static_cast<int>(it.col()), it.value());
    for (int i = 0; i < n_; ++i) trip.emplace_back(i, i, rho_);
    for (int j = 0; j < qp_.A.outerSize(); ++j) {
      for (SpMat::InnerIterator it(qp_.A, j); it; ++it) {
        trip.emplace_back(n_ + static_cast<int>(it.row()),
                          static_cast<int>(it.col()), it.value());
        trip.emplace_back(static_cast<int>(it.col()),
                          n_ + static_cast<int>(it.row()), it.value());
      }
    }
    for (int i = 0; i < me_; ++i) trip.emplace_back(n_ + i, n_ + i, -delta_);

    SpMat kkt(n_ + me_, n_ + me_);
    kkt.setFromTriplets(trip.begin(), trip.end());
    kkt_ = kkt;

    if (!analyzed_) {
      solver_.analyzePattern(kkt_);
      analyzed_ = true;
    }
    solver_.factorize(kkt_);
    if (solver_.info() != Eigen::Success)
      fail_solver("KKT factorization failed (singular system)");
  }

  // Solves for (dx, dy) with one step of iterative refinement.
  void solve(const Vec& rx, const Vec& ry, Vec* dx, Vec* dy) const {
    Vec rhs(n_ + me_);
    rhs.head(n_) = rx;
    if (me_) rhs.tail(me_) = ry;
    Vec u = solver_.solve(rhs);
    const Vec res = rhs - kkt_ * u;
    u += solver_.solve(res);
    *dx = u.head(n_);
    *dy = me_ ? Vec(u.tail(me_)) : Vec();
  }

 private:
  const QpProblem& qp_;
  double rho_, delta_;
  int n_, me_;
  SpMat kkt_;
  Eigen::SparseLU<SpMat> solver_;
  bool analyzed_ = false;
};

}  // namespace

QpSolution solve_qp(const QpProblem& qp, const QpSettings& settings) {
  const int n = qp.n();
  const int me = qp.n_eq();
  const int mi = qp.n_in();
  if (static_cast<int>(qp.H.rows()) != n || static_cast<int>(qp.H.cols()) != n)
    fail_input("QP: Hessian shape mismatch");
  if (me && static_cast<int>(qp.A.cols()) != n)
    fail_input("QP: equality matrix shape mismatch");
  if (mi && static_cast<int>(qp.C.cols()) != n)
    fail_input("QP: inequality matrix shape mismatch");

  const double h_scale = qp.H.nonZeros()
                             ? Vec(qp.H.diagonal()).cwiseAbs().maxCoeff()
                             : 0.0;
  const double rho = 1e-11 * (1.0 + h_scale);
  const double delta = 1e-12 * (1.0 + inf_norm(qp.b));

  KktSystem kkt(qp, rho, delta);
  QpSolution sol;

  if (mi == 0) {
    // Equality-constrained QP: a single KKT solve.
    kkt.factorize(Vec());
    Vec dx, dy;
    kkt.solve(-qp.g, qp.b, &dx, &dy);
    sol.x = dx;
    sol.y = dy;
    sol.z = Vec();
    sol.objective = qp.objective(sol.x);
    sol.kkt_residual = kkt_residuals(qp, sol.x, sol.y, sol.z).max_residual();
    sol.converged = sol.kkt_residual <= settings.tolerance * 10;
    sol.iterations = 1;
    return sol;
  }

  // Starting point: equality-regularized Newton step, then slacks and
  // multipliers shifted into the positive orthant.
  Vec x, y;
  kkt.factorize(Vec::Ones(mi) * 1.0);
  kkt.solve(-qp.g, qp.b, &x, &y);
  if (!me) y = Vec();

  Vec s = qp.d - qp.C * x;
  const double shift = std::max(0.0, -1.5 * (s.size() ? s.minCoeff() : 0.0));
  s.array() += shift;
  Vec z = Vec::Ones(mi);
  {
    const double sz = s.dot(z);
    const double ds = 0.5 * sz / z.sum();
    const double dz = 0.5 * sz / std::max(s.sum(), 1e-8);
    s.array() += std::max(ds, 1e-2);
    z.array() += std::max(dz, 1e-2);
  }

  const double obj_floor = 1.0;
  for (int it = 0; it < settings.max_iterations; ++it) {
    const Vec Hx = qp.H * x;
    Vec r_d = Hx + qp.g + qp.C.transpose() * z;
    if (me) r_d += qp.A.transpose() * y;
    const Vec r_p = me ? Vec(qp.A * x - qp.b) : Vec();
    const Vec cx = qp.C * x;
    const Vec r_s = cx + s - qp.d;
    const double mu = s.dot(z) / mi;

    const double dscale = 1.0 + std::max({inf_norm(Hx), inf_norm(qp.g),
                                          inf_norm(qp.C.transpose() * z)});
    const double rel_d = inf_norm(r_d) / dscale;
    const double rel_p =
        me ? inf_norm(r_p) / (1.0 + std::max(inf_norm(qp.b), inf_norm(qp.A * x)))
           : 0.0;
    const double rel_s =
        inf_norm(r_s) / (1.0 + std::max(inf_norm(cx), inf_norm(qp.d)));
    const double rel_mu =
        mu / (obj_floor + std::abs(qp.objective(x)));

    if (settings.verbose)
      log_debug("qp it " + std::to_string(it) + " mu=" + std::to_string(mu) +
                " rd=" + std::to_string(rel_d) + " rp=" + std::to_string(rel_p));

    if (rel_d <= settings.tolerance && rel_p <= settings.tolerance &&
        rel_s <= settings.tolerance && rel_mu <= settings.tolerance) {
      sol.converged = true;
      break;
    }
    if (inf_norm(z) > 1e13 || (me && inf_norm(y) > 1e13))
      fail_solver("QP appears infeasible (diverging multipliers)");

    const Vec scaling = z.cwiseQuotient(s);
    kkt.factorize(scaling);

    // Predictor (affine scaling direction).
    Vec rc = s.cwiseProduct(z);
    Vec temp = (-rc + z.cwiseProduct(r_s)).cwiseQuotient(s);
    Vec dx, dy;
    kkt.solve(-r_d - qp.C.transpose() * temp, me ? Vec(-r_p) : Vec(), &dx, &dy);
    Vec dz = temp + scaling.cwiseProduct(qp.C * dx);
    Vec ds = -r_s - qp.C * dx;

    const double tau = rel_mu > 1e-5 ? 0.995 : 0.9995;
    const double ap_aff = step_to_boundary(s, ds, 1.0);
    const double ad_aff = step_to_boundary(z, dz, 1.0);
    const double mu_aff =
        (s + ap_aff * ds).dot(z + ad_aff * dz) / static_cast<double>(mi);
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    // Corrector.
    rc = s.cwiseProduct(z) + ds.cwiseProduct(dz);
    rc.array() -= sigma * mu;
    temp = (-rc + z.cwiseProduct(r_s)).cwiseQuotient(s);
    kkt.solve(-r_d - qp.C.transpose() * temp, me ? Vec(-r_p) : Vec(), &dx, &dy);
    dz = temp + scaling.cwiseProduct(qp.C * dx);
    ds = -r_s - qp.C * dx;

    const double ap = step_to_boundary(s, ds, tau);
    const double ad = step_to_boundary(z, dz, tau);
    x += ap * dx;
    s += ap * ds;
    if (me) y += ad * dy;
    z += ad * dz;
    sol.iterations = it + 1;
  }

  sol.x = x;
  sol.y = me ? y : Vec();
  sol.z = z;
  sol.objective = qp.objective(x);
  sol.kkt_residual = kkt_residuals(qp, sol.x, sol.y, sol.z).max_residual();
  if (!sol.converged)
    log_warn("QP did not reach tolerance after " +
             std::to_string(sol.iterations) +
             " iterations (residual " + std::to_string(sol.kkt_residual) + ")");
  return sol;
}

}  // namespace gridgen
