#include "gridgen/dc_flow.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>

namespace gridgen {

struct FlowOperator::Impl {
  int nb = 0;
  int nl = 0;
  int ref = 0;
  SpMat incidence;             // buses x lines
  Vec susceptance;
  Eigen::SimplicialLDLT<SpMat> solver;  // grounded Laplacian

  Impl(const NetworkMatrices& m, int reference_bus)
      : nb(static_cast<int>(m.incidence.rows())),
        nl(static_cast<int>(m.incidence.cols())),
        ref(reference_bus),
        incidence(m.incidence),
        susceptance(m.susceptance) {
    if (nb < 1) fail_input("flow operator needs at least one bus");
    if (ref < 0 || ref >= nb) fail_input("reference bus out of range");

    const SpMat weighted = incidence * susceptance.asDiagonal();
    SpMat laplacian = (weighted * incidence.transpose()).pruned();

    // Ground the reference bus by selecting the remaining rows/columns.
    std::vector<Triplet> trip;
    trip.reserve(nb - 1);
    for (int i = 0, r = 0; i < nb; ++i) {
      if (i == ref) continue;
      trip.emplace_back(r++, i, 1.0);
    }
    SpMat select(nb - 1, nb);
    select.setFromTriplets(trip.begin(), trip.end());
    SpMat reduced = select * laplacian * select.transpose();

    solver.compute(reduced);
    if (solver.info() != Eigen::Success)
      fail_input(
          "grounded network Laplacian is singular; is the network connected?");
  }

  Vec angles_for(const Vec& injections) const {
    Vec rhs(nb - 1);
    for (int i = 0, r = 0; i < nb; ++i)
      if (i != ref) rhs[r++] = injections[i];
    const Vec reduced = solver.solve(rhs);
    Vec theta = Vec::Zero(nb);
    for (int i = 0, r = 0; i < nb; ++i)
      if (i != ref) theta[i] = reduced[r++];
    return theta;
  }

  Vec flows_from_angles(const Vec& theta) const {
    return susceptance.asDiagonal() * (incidence.transpose() * theta);
  }
};

FlowOperator::FlowOperator(const NetworkMatrices& matrices, int reference_bus)
    : impl_(std::make_unique<Impl>(matrices, reference_bus)) {}
FlowOperator::~FlowOperator() = default;
FlowOperator::FlowOperator(FlowOperator&&) noexcept = default;
FlowOperator& FlowOperator::operator=(FlowOperator&&) noexcept = default;

int FlowOperator::n_buses() const { return impl_->nb; }
int FlowOperator::n_lines() const { return impl_->nl; }

Vec FlowOperator::flows(const Vec& injections, double balance_tol) const {
  if (static_cast<int>(injections.size()) != impl_->nb)
    fail_input("injection vector has the wrong length");
  const double imbalance = injections.sum();
  if (std::abs(imbalance) > balance_tol)
    fail_input("injections are unbalanced by " + std::to_string(imbalance));
  const Vec projected =
      injections.array() - imbalance / static_cast<double>(impl_->nb);
  return impl_->flows_from_angles(impl_->angles_for(projected));
}

Vec FlowOperator::response(const Vec& injections) const {
  if (static_cast<int>(injections.size()) != impl_->nb)
    fail_input("injection vector has the wrong length");
  return impl_->flows_from_angles(impl_->angles_for(injections));
}

Mat FlowOperator::response_columns(const std::vector<int>& buses) const {
  Mat out(impl_->nl, buses.size());
  Vec unit = Vec::Zero(impl_->nb);
  for (std::size_t c = 0; c < buses.size(); ++c) {
    const int b = buses[c];
    if (b < 0 || b >= impl_->nb) fail_input("response bus out of range");
    unit[b] = 1.0;
    out.col(static_cast<Eigen::Index>(c)) =
        impl_->flows_from_angles(impl_->angles_for(unit));
    unit[b] = 0.0;
  }
  return out;
}

Table flows_for_table(const Network& net, const Table& loads,
                      const Table& gens, double balance_tol) {
  const auto matrices = build_matrices(net);
  const FlowOperator op(matrices);
  const int T = loads.rows();
  if (gens.rows() != T)
    fail_input("load and generator tables differ in row count");

  std::vector<int> load_bus(loads.cols());
  for (int c = 0; c < loads.cols(); ++c) {
    load_bus[c] = net.bus_index(loads.labels[c]);
    if (load_bus[c] < 0)
      fail_input("load column '" + loads.labels[c] + "' is not a bus label");
  }
  std::vector<int> gen_bus(gens.cols());
  {
    std::map<std::string, int> gen_index;
    for (int i = 0; i < static_cast<int>(net.generators.size()); ++i)
      gen_index[net.generators[i].id] = i;
    for (int c = 0; c < gens.cols(); ++c) {
      const auto it = gen_index.find(gens.labels[c]);
      if (it == gen_index.end())
        fail_input("generator column '" + gens.labels[c] +
                   "' is not a generator label");
      gen_bus[c] = net.generators[it->second].bus;
    }
  }

  Table out;
  out.labels.reserve(net.lines.size());
  for (const auto& l : net.lines) out.labels.push_back(l.id);
  out.values.resize(T, static_cast<Eigen::Index>(net.lines.size()));

  Vec inj(net.buses.size());
  for (int t = 0; t < T; ++t) {
    inj.setZero();
    for (int c = 0; c < loads.cols(); ++c)
      inj[load_bus[c]] -= loads.values(t, c);
    for (int c = 0; c < gens.cols(); ++c)
      inj[gen_bus[c]] += gens.values(t, c);
    const double imbalance = inj.sum();
    if (std::abs(imbalance) > balance_tol)
      fail_input("injections unbalanced at step " + std::to_string(t) +
                 " by " + std::to_string(imbalance));
    const Vec projected =
        inj.array() - imbalance / static_cast<double>(net.buses.size());
    out.values.row(t) = op.flows(projected, balance_tol).transpose();
  }
  return out;
}

std::vector<double> loading_fractions(const Mat& flows, const Vec& limits,
                                      const std::vector<double>& thresholds) {
  if (flows.cols() != limits.size())
    fail_input("loading_fractions: one limit per line required");
  for (Eigen::Index a = 0; a < limits.size(); ++a)
    if (!(limits[a] > 0.0)) fail_input("thermal limits must be positive");

  const double total = static_cast<double>(flows.rows()) *
                       static_cast<double>(flows.cols());
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (const double thr : thresholds) {
    std::int64_t count = 0;
    for (Eigen::Index a = 0; a < flows.cols(); ++a) {
      const double lim = limits[a] * thr;
      for (Eigen::Index t = 0; t < flows.rows(); ++t)
        if (std::abs(flows(t, a)) >= lim) ++count;
    }
    out.push_back(total > 0 ? static_cast<double>(count) / total : 0.0);
  }
  return out;
}

}  // namespace gridgen
