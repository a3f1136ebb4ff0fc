#pragma once

// One force evaluation: lists, bond orders, charges, kernels, reduction.

#include <array>
#include <optional>

#include "reaxkit/bonded.hpp"
#include "reaxkit/core.hpp"
#include "reaxkit/neighbor.hpp"
#include "reaxkit/parallel.hpp"
#include "reaxkit/qeq.hpp"

namespace reaxkit {

/// Which energy terms contribute.  Disabled terms add neither energy nor force.
struct TermMask {
  std::array<bool, kNumEnergyTerms> enabled{true, true, true, true, true, true, true, true};

  static TermMask all() { return {}; }
  static TermMask only(EnergyTerm term) {
    TermMask m;
    m.enabled.fill(false);
    m.enabled[static_cast<std::size_t>(term)] = true;
    return m;
  }
  bool operator()(EnergyTerm term) const { return enabled[static_cast<std::size_t>(term)]; }
};

struct EnergyBreakdown {
  std::array<double, kNumEnergyTerms> terms{};

  double operator[](EnergyTerm term) const { return terms[static_cast<std::size_t>(term)]; }
  double potential() const {
    double e = 0.0;
    for (double t : terms) e += t;
    return e;
  }
};

struct EngineOptions {
  double qeq_tol = 1.0e-6;
  int qeq_max_iter = 200;
  ExtrapolationOrder extrapolation = ExtrapolationOrder::kLinear;
  int reneighbor_every = 10;
  /// false: keep the charges already in the state (frozen-charge evaluation).
  bool solve_charges = true;
  TermMask terms{};
  std::size_t bond_capacity = kDefaultBondCapacity;
  std::size_t hbond_capacity = kDefaultHBondCapacity;
};

class ForceEngine {
 public:
  ForceEngine(const ForceField& ff, EngineOptions options, ExecContext ctx);

  /// Rebuilds the neighbour list when state.step is a multiple of the
  /// reneighbour interval (or no list exists yet), otherwise refreshes its
  /// distances; then builds the bonded lists, equilibrates the charges and
  /// writes the forces into state.force.
  EnergyBreakdown compute(SystemState& state, const SimBox& box);

  /// Forces the next compute() to rebuild the neighbour list.
  void invalidate_lists() { have_list_ = false; }
  /// Drops the charge-solver history (next guess is the diagonal solve).
  void reset_charge_history() { qeq_.clear_history(); }

  const ForceField& forcefield() const { return ff_; }
  const EngineOptions& options() const { return options_; }
  EngineOptions& options() { return options_; }
  const ExecContext& context() const { return ctx_; }

  const HalfNeighborList& neighbors() const { return neighbors_; }
  const BondList& bonds() const { return bonds_; }
  const Overcoordination& overcoordination() const { return over_; }
  const HBondList& hbonds() const { return hbonds_; }
  const AngleList& angles() const { return angles_; }
  const TorsionList& torsions() const { return torsions_; }
  const SparseHalfMatrix& qeq_matrix() const { return matrix_; }
  const QEqState& qeq_state() const { return qeq_; }
  const std::array<double, 9>& virial() const { return virial_; }

 private:
  const ForceField& ff_;
  EngineOptions options_;
  ExecContext ctx_;

  bool have_list_ = false;
  HalfNeighborList neighbors_;
  BondList bonds_;
  Overcoordination over_;
  HBondList hbonds_;
  AngleList angles_;
  TorsionList torsions_;
  SparseHalfMatrix matrix_;
  QEqState qeq_;
  PrivatizedAccumulator acc_;
  std::array<double, 9> virial_{};
};

}  // namespace reaxkit
