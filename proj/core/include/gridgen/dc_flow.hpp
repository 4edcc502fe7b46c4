#pragma once

#include "gridgen/common.hpp"
#include "gridgen/grid_model.hpp"
#include "gridgen/tables.hpp"

#include <memory>
#include <vector>

namespace gridgen {

// Linear map from balanced bus injections to per-line active power under
// the lossless DC approximation. Backed by one sparse factorization of the
// grounded weighted Laplacian; the result does not depend on the choice of
// reference bus for balanced injections (injections are projected onto the
// zero-sum subspace before solving).
class FlowOperator {
 public:
  FlowOperator(const NetworkMatrices& matrices, int reference_bus = 0);
  ~FlowOperator();
  FlowOperator(FlowOperator&&) noexcept;
  FlowOperator& operator=(FlowOperator&&) noexcept;

  int n_buses() const;
  int n_lines() const;

  // One time step. Throws for injections whose sum exceeds balance_tol.
  Vec flows(const Vec& injections, double balance_tol = 1e-8) const;

  // Raw response without the balance check: unit injection at each listed
  // bus against the reference bus, one column per entry. Used to assemble
  // flow-sensitivity blocks.
  Mat response_columns(const std::vector<int>& buses) const;

  // Raw grounded-reference response for an arbitrary injection vector
  // (the reference bus absorbs any imbalance). Agrees with flows() on
  // balanced injections.
  Vec response(const Vec& injections) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Applies one factorization to every row of the injection tables.
// Loads enter negatively, generator outputs positively; each generator
// column is mapped onto its bus. Throws, naming the step, if any row is
// unbalanced beyond balance_tol.
Table flows_for_table(const Network& net, const Table& loads,
                      const Table& gens, double balance_tol = 1e-8);

// Fraction of (line, step) pairs with |flow| / thermal_limit >= threshold,
// for each threshold (comparison is inclusive).
std::vector<double> loading_fractions(const Mat& flows, const Vec& limits,
                                      const std::vector<double>& thresholds);

}  // namespace gridgen
