#include "reaxkit/engine.hpp"

#include <cmath>
#include <string>

#include "reaxkit/error.hpp"

namespace reaxkit {

ForceEngine::ForceEngine(const ForceField& ff, EngineOptions options, ExecContext ctx)
    : ff_(ff), options_(options), ctx_(ctx) {
  if (ctx_.pool == nullptr) throw InputError("force engine needs a thread pool");
  if (options_.reneighbor_every < 1) throw InputError("reneighbor_every must be at least 1");
  if (!(options_.qeq_tol > 0.0)) throw InputError("QEq tolerance must be positive");
  if (options_.qeq_max_iter < 1) throw InputError("QEq max_iter must be at least 1");
  ff_.validate();
}

EnergyBreakdown ForceEngine::compute(SystemState& state, const SimBox& box) {
  const std::size_t n = state.size();
  PerfCounters* perf = ctx_.perf;
  std::span<const int> types(state.type);

  {
    KernelTimer timer(perf, "write-lists");
    if (!have_list_ || neighbors_.num_atoms() != n || needs_rebuild(state.step, options_.reneighbor_every)) {
      const auto grid = build_cell_grid(state, box, ff_.r_nonb);
      neighbors_ = build_half_neighbor_list(state, box, grid, ff_.r_nonb, ctx_);
      neighbors_.build_step = state.step;
      have_list_ = true;
    } else {
      refresh_neighbor_distances(neighbors_, state, box, ctx_);
    }
  }
  {
    KernelTimer timer(perf, "init-forces");
    bonds_ = build_bond_list(neighbors_, types, ff_, ctx_, options_.bond_capacity);
  }
  {
    KernelTimer timer(perf, "bond-orders");
    over_ = correct_bond_orders(bonds_, types, ff_, ctx_);
  }
  {
    KernelTimer timer(perf, "init-forces");
    hbonds_ = build_hbond_list(neighbors_, bonds_, types, ff_, ctx_, options_.hbond_capacity);
  }
  {
    KernelTimer timer(perf, "3-body");
    angles_ = build_angle_list(bonds_, ff_, ctx_);
  }
  {
    KernelTimer timer(perf, "4-body");
    torsions_ = build_torsion_list(angles_, ctx_);
  }

  if (options_.solve_charges) {
    KernelTimer timer(perf, "qeq");
    matrix_ = build_qeq_matrix(neighbors_, types, ff_, ctx_);
    std::vector<double> chi(n), eta(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& t = ff_.types[static_cast<std::size_t>(state.type[i])];
      chi[i] = t.chi;
      eta[i] = t.eta;
    }
    const auto guess = extrapolate_guess(qeq_, chi, eta, options_.extrapolation);
    auto solved = cg_dual(matrix_, chi, options_.qeq_tol, options_.qeq_max_iter, guess, ctx_);
    solved.s_history = std::move(qeq_.s_history);
    solved.t_history = std::move(qeq_.t_history);
    qeq_ = std::move(solved);
    qeq_.push_history();
    state.charge = charges_from_st(qeq_.s, qeq_.t, state.net_charge);
  }

  const auto& mask = options_.terms;
  {
    KernelTimer timer(perf, "init-forces");
    if (acc_.threads() != ctx_.threads() || acc_.atoms() != n) acc_.resize(ctx_.threads(), n);
    acc_.resize_bond_derivatives(bonds_.num_entries());
    acc_.zero(*ctx_.pool);
  }
  {
    KernelTimer timer(perf, "nonbonded");
    if (mask(EnergyTerm::kVdw) || mask(EnergyTerm::kCoulomb)) {
      energy_forces_nonbonded(neighbors_, types, state.charge, ff_, acc_, ctx_, mask(EnergyTerm::kVdw),
                              mask(EnergyTerm::kCoulomb));
    }
    if (mask(EnergyTerm::kPolarization)) {
      acc_.add_energy(0, EnergyTerm::kPolarization, polarization_energy(types, state.charge, ff_));
    }
  }
  {
    KernelTimer timer(perf, "3-body");
    if (mask(EnergyTerm::kAngle)) energy_forces_angles(angles_, bonds_, types, ff_, acc_, ctx_);
    if (mask(EnergyTerm::kHBond)) energy_forces_hbond(hbonds_, bonds_, types, ff_, acc_, ctx_);
  }
  {
    KernelTimer timer(perf, "4-body");
    if (mask(EnergyTerm::kTorsion)) energy_forces_torsions(torsions_, bonds_, ff_, acc_, ctx_);
  }
  {
    KernelTimer timer(perf, "bond-orders");
    energy_forces_bonded(bonds_, over_, types, ff_, acc_, ctx_, mask(EnergyTerm::kBond), mask(EnergyTerm::kOver));
  }

  EnergyBreakdown out;
  {
    KernelTimer timer(perf, "aggregate-forces");
    state.force.resize(n);
    out.terms = reduce_privatized(*ctx_.pool, acc_, state.force);
    virial_ = acc_.virial();
  }
  for (double e : out.terms) {
    if (!std::isfinite(e)) throw Error("non-finite energy at step " + std::to_string(state.step));
  }
  return out;
}

}  // namespace reaxkit
