#pragma once

// Bond-order evaluation, interaction-list construction and the energy/force
// kernels of the surrogate reactive force field.
//
// Every bonded energy is a function of the corrected bond orders
//
//   BO(i,j) = BO_raw(r_ij) · f_i · f_j,   f_i = exp(-λ · softplus_k(Δ_i)),
//   Δ_i = Σ_j BO_raw(i,j) - Val_i,
//
// plus explicit geometry.  Kernels accumulate their geometric forces directly
// and their ∂E/∂BO into per-thread bond-derivative buffers; the bond kernel
// (energy_forces_bonded) runs last and converts the accumulated ∂E/∂BO into
// forces through BO_raw(r), f_i and Δ_i.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reaxkit/core.hpp"
#include "reaxkit/neighbor.hpp"
#include "reaxkit/parallel.hpp"

namespace reaxkit {

inline constexpr std::size_t kDefaultBondCapacity = 32;
inline constexpr std::size_t kDefaultHBondCapacity = 64;

struct BondEntry {
  std::uint32_t j = 0;
  std::uint32_t sym = 0;  // index of the mirrored entry j→i
  double r = 0.0;
  Vec3 d{};               // r_j - r_i (minimum image)
  double bo_raw = 0.0;
  double bo = 0.0;        // corrected
  double dbo_raw_dr = 0.0;
};

/// Full (symmetric) CSR bond list; rows sorted by j.
struct BondList {
  std::vector<std::size_t> offsets;
  std::vector<BondEntry> entries;

  std::size_t num_atoms() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t num_entries() const { return entries.size(); }
  std::span<const BondEntry> row(std::size_t i) const {
    return {entries.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
};

/// Per-atom over-coordination and the resulting correction factors.
struct Overcoordination {
  std::vector<double> delta;   // Δ_i
  std::vector<double> factor;  // f_i
};

double softplus(double x, double k);
/// d softplus / dx, i.e. the logistic function of k·x.
double softplus_slope(double x, double k);

/// C¹ ramp ((b - cut) / (1 - cut))² above cut, 0 below.
double bo_ramp(double b, double cut);
double bo_ramp_derivative(double b, double cut);

/// Single pass over the half neighbour list.  Each qualifying pair reserves a
/// slot in the rows of both atoms; the reservation is the only synchronised
/// step.  Throws CapacityError when any atom exceeds `capacity` bonds.
BondList build_bond_list_fixed(const HalfNeighborList& nbrs, std::span<const int> types, const ForceField& ff,
                               const ExecContext& ctx, std::size_t capacity);

/// build_bond_list_fixed, doubling the capacity and rebuilding on overflow.
BondList build_bond_list(const HalfNeighborList& nbrs, std::span<const int> types, const ForceField& ff,
                         const ExecContext& ctx, std::size_t capacity = kDefaultBondCapacity);

/// Fills Δ and f from the raw bond orders and writes the corrected BO into
/// both entries of every bond.
Overcoordination correct_bond_orders(BondList& bonds, std::span<const int> types, const ForceField& ff,
                                     const ExecContext& ctx);

struct HBondAcceptor {
  std::uint32_t z = 0;
  double r = 0.0;
  Vec3 d{};  // r_Z - r_H
};

/// Row h lists the acceptors within the H-bond cutoff of hydrogen h; rows of
/// atoms without a qualifying donor bond are empty.
struct HBondList {
  std::vector<std::size_t> offsets;
  std::vector<HBondAcceptor> entries;

  std::size_t num_atoms() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::span<const HBondAcceptor> row(std::size_t h) const {
    return {entries.data() + offsets[h], offsets[h + 1] - offsets[h]};
  }
};

/// True iff bond entry `e` of hydrogen h is a donor bond (donor-type partner,
/// corrected BO >= donor_bo).
bool is_donor_bond(const BondEntry& e, std::span<const int> types, const ForceField& ff);

HBondList build_hbond_list(const HalfNeighborList& nbrs, const BondList& bonds, std::span<const int> types,
                           const ForceField& ff, const ExecContext& ctx,
                           std::size_t capacity = kDefaultHBondCapacity);

struct Angle {
  std::uint32_t i = 0;
  std::uint32_t j = 0;  // centre
  std::uint32_t k = 0;
  std::uint32_t bond_ji = 0;  // entry indices in row j
  std::uint32_t bond_jk = 0;
  double ramp_ji = 0.0;       // cached g(BO)
  double ramp_jk = 0.0;
};

/// Angles grouped by centre atom; offsets is the exclusive prefix sum of the
/// per-atom counts.
struct AngleList {
  std::vector<std::size_t> offsets;
  std::vector<Angle> angles;

  std::size_t num_atoms() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t count(std::size_t j) const { return offsets[j + 1] - offsets[j]; }
  std::span<const Angle> centred_on(std::size_t j) const {
    return {angles.data() + offsets[j], offsets[j + 1] - offsets[j]};
  }
};

AngleList build_angle_list(const BondList& bonds, const ForceField& ff, const ExecContext& ctx);

struct Torsion {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::uint32_t k = 0;
  std::uint32_t l = 0;
  std::uint32_t bond_ji = 0;
  std::uint32_t bond_jk = 0;
  std::uint32_t bond_kl = 0;
};

/// Torsions grouped by the lower-index atom j of the central bond.
struct TorsionList {
  std::vector<std::size_t> offsets;
  std::vector<Torsion> torsions;

  std::size_t num_atoms() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::span<const Torsion> owned_by(std::size_t j) const {
    return {torsions.data() + offsets[j], offsets[j + 1] - offsets[j]};
  }
};

/// Pairs the angles (i,j,k) and (j,k,l) that share bond j-k, for j < k and i != l.
TorsionList build_torsion_list(const AngleList& angles, const ExecContext& ctx);

struct BondedEnergies {
  double bond = 0.0;
  double over = 0.0;
};

/// E_bond = -Σ De·BO over bonds, E_over = Σ p_over·softplus(Δ).  Also turns
/// every ∂E/∂BO accumulated so far into forces; call after the angle, torsion
/// and H-bond kernels.
BondedEnergies energy_forces_bonded(const BondList& bonds, const Overcoordination& over, std::span<const int> types,
                                    const ForceField& ff, PrivatizedAccumulator& acc, const ExecContext& ctx,
                                    bool include_bond = true, bool include_over = true);

double energy_forces_angles(const AngleList& angles, const BondList& bonds, std::span<const int> types,
                            const ForceField& ff, PrivatizedAccumulator& acc, const ExecContext& ctx);

double energy_forces_torsions(const TorsionList& torsions, const BondList& bonds, const ForceField& ff,
                              PrivatizedAccumulator& acc, const ExecContext& ctx);

double energy_forces_hbond(const HBondList& hbonds, const BondList& bonds, std::span<const int> types,
                           const ForceField& ff, PrivatizedAccumulator& acc, const ExecContext& ctx);

struct NonbondedEnergies {
  double vdw = 0.0;
  double coulomb = 0.0;
};

/// Tapered Morse van der Waals and shielded Coulomb over the half list.
NonbondedEnergies energy_forces_nonbonded(const HalfNeighborList& nbrs, std::span<const int> types,
                                          std::span<const double> charges, const ForceField& ff,
                                          PrivatizedAccumulator& acc, const ExecContext& ctx,
                                          bool include_vdw = true, bool include_coulomb = true);

/// Mixed van der Waals parameters (geometric means) and the Coulomb
/// shielding γ_ij = sqrt(γ_i γ_j).
struct PairMix {
  double depth = 0.0;
  double alpha = 0.0;
  double radius = 0.0;
  double gamma = 0.0;
};
PairMix mix_pair(const AtomType& a, const AtomType& b);

/// Tapered, shielded Coulomb kernel without the charges:
/// C · T(r) · (r³ + γ⁻³)^(-1/3).
double shielded_coulomb_kernel(double r, double gamma, const ForceField& ff);

/// Σ χ_i q_i + ½ η_i q_i², the self term of the charge-equilibration energy.
double polarization_energy(std::span<const int> types, std::span<const double> charges, const ForceField& ff);

}  // namespace reaxkit
