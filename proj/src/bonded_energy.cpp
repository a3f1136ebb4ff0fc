#include <cmath>

#include "reaxkit/bonded.hpp"
#include "reaxkit/error.hpp"

namespace reaxkit {
namespace {

constexpr double kMinBondLength = 1.0e-8;

void check_length(double r2, const char* what) {
  if (r2 < kMinBondLength * kMinBondLength) throw GeometryError(std::string("degenerate ") + what + ": coincident atoms");
}

/// cosθ between a and b and its gradients with respect to a and b.
struct CosineGrad {
  double c;
  Vec3 dc_da;
  Vec3 dc_db;
};

CosineGrad cosine_with_gradient(const Vec3& a, const Vec3& b) {
  const double aa = dot(a, a);
  const double bb = dot(b, b);
  const double inv = 1.0 / std::sqrt(aa * bb);
  const double c = dot(a, b) * inv;
  return {c, b * inv - a * (c / aa), a * inv - b * (c / bb)};
}

}  // namespace

double energy_forces_angles(const AngleList& angles, const BondList& bonds, std::span<const int> types,
                            const ForceField& ff, PrivatizedAccumulator& acc, const ExecContext& ctx) {
  const double cut = ff.thb_cut;
  ctx.for_each(angles.num_atoms(), [&](std::size_t b, std::size_t e, int tid) {
    auto& dbo = acc.bond_derivative(tid);
    double energy = 0.0;
    for (std::size_t j = b; j < e; ++j) {
      const auto& par = ff.angles[static_cast<std::size_t>(types[j])];
      if (par.k_theta == 0.0) continue;
      const double cos0 = std::cos(par.theta0);
      for (const auto& a : angles.centred_on(j)) {
        const auto& bji = bonds.entries[a.bond_ji];
        const auto& bjk = bonds.entries[a.bond_jk];
        check_length(dot(bji.d, bji.d), "angle");
        check_length(dot(bjk.d, bjk.d), "angle");
        const auto cg = cosine_with_gradient(bji.d, bjk.d);
        const double dev = cg.c - cos0;
        const double g1 = bo_ramp(bji.bo, cut);
        const double g2 = bo_ramp(bjk.bo, cut);
        energy += par.k_theta * g1 * g2 * dev * dev;

        dbo[a.bond_ji] += par.k_theta * bo_ramp_derivative(bji.bo, cut) * g2 * dev * dev;
        dbo[a.bond_jk] += par.k_theta * g1 * bo_ramp_derivative(bjk.bo, cut) * dev * dev;

        const double de_dc = 2.0 * par.k_theta * g1 * g2 * dev;
        // bji.d = r_i - r_j, so the pair helper puts +dE/db on j and -dE/db on i.
        acc.add_pair_force(tid, j, a.i, bji.d, cg.dc_da * de_dc);
        acc.add_pair_force(tid, j, a.k, bjk.d, cg.dc_db * de_dc);
      }
    }
    acc.add_energy(tid, EnergyTerm::kAngle, energy);
  });
  return acc.energies()[static_cast<std::size_t>(EnergyTerm::kAngle)];
}

double energy_forces_torsions(const TorsionList& torsions, const BondList& bonds, const ForceField& ff,
                              PrivatizedAccumulator& acc, const ExecContext& ctx) {
  const double k_phi = ff.torsion.k_phi;
  const double cut = ff.thb_cut;
  if (k_phi == 0.0) return acc.energies()[static_cast<std::size_t>(EnergyTerm::kTorsion)];
  ctx.for_each(torsions.num_atoms(), [&](std::size_t b, std::size_t e, int tid) {
    auto& dbo = acc.bond_derivative(tid);
    double energy = 0.0;
    for (std::size_t owner = b; owner < e; ++owner) {
      for (const auto& t : torsions.owned_by(owner)) {
        const auto& bji = bonds.entries[t.bond_ji];
        const auto& bjk = bonds.entries[t.bond_jk];
        const auto& bkl = bonds.entries[t.bond_kl];
        const Vec3 b1 = -bji.d;  // r_j - r_i
        const Vec3& b2 = bjk.d;  // r_k - r_j
        const Vec3& b3 = bkl.d;  // r_l - r_k

        const double p11 = dot(b1, b1), p22 = dot(b2, b2), p33 = dot(b3, b3);
        const double p12 = dot(b1, b2), p23 = dot(b2, b3), p13 = dot(b1, b3);
        check_length(p11, "torsion");
        check_length(p22, "torsion");
        check_length(p33, "torsion");

        // |b1×b2|², |b2×b3|², (b1×b2)·(b2×b3) and the normaliser of the
        // sin²θ₁·sin²θ₂ damping factor.
        const double A = p11 * p22 - p12 * p12;
        const double B = p22 * p33 - p23 * p23;
        const double N = p12 * p23 - p13 * p22;
        const double D = p11 * p22 * p22 * p33;
        // Collinear: the damping factor has driven the term and its gradient to zero.
        if (A * B <= 1.0e-20 * D) continue;

        const double sqrt_ab = std::sqrt(A * B);
        const double c = N / sqrt_ab;
        const double F = 0.5 * (1.0 + 4.0 * c * c * c - 3.0 * c);
        const double Fp = 0.5 * (12.0 * c * c - 3.0);
        const double P = A * B / D;
        const double geo = P * F;

        const double g1 = bo_ramp(bji.bo, cut);
        const double g2 = bo_ramp(bjk.bo, cut);
        const double g3 = bo_ramp(bkl.bo, cut);
        const double scale = k_phi * g1 * g2 * g3;
        energy += scale * geo;

        dbo[t.bond_ji] += k_phi * bo_ramp_derivative(bji.bo, cut) * g2 * g3 * geo;
        dbo[t.bond_jk] += k_phi * g1 * bo_ramp_derivative(bjk.bo, cut) * g3 * geo;
        dbo[t.bond_kl] += k_phi * g1 * g2 * bo_ramp_derivative(bkl.bo, cut) * geo;

        if (scale == 0.0) continue;
        // dE = [ (F - F'c/2)(B dA + A dB) - F P dD + F' sqrt(AB) dN ] / D
        const double wA = scale * (F - 0.5 * Fp * c) * B / D;
        const double wB = scale * (F - 0.5 * Fp * c) * A / D;
        const double wD = -scale * F * P / D;
        const double wN = scale * Fp * sqrt_ab / D;

        const double G11 = wA * p22 + wD * p22 * p22 * p33;
        const double G22 = wA * p11 + wB * p33 + wD * 2.0 * p11 * p22 * p33 - wN * p13;
        const double G33 = wB * p22 + wD * p11 * p22 * p22;
        const double G12 = -2.0 * wA * p12 + wN * p23;
        const double G23 = -2.0 * wB * p23 + wN * p12;
        const double G13 = -wN * p22;

        const Vec3 dE_db1 = b1 * (2.0 * G11) + b2 * G12 + b3 * G13;
        const Vec3 dE_db2 = b2 * (2.0 * G22) + b1 * G12 + b3 * G23;
        const Vec3 dE_db3 = b3 * (2.0 * G33) + b2 * G23 + b1 * G13;

        acc.add_pair_force(tid, t.i, t.j, b1, dE_db1);
        acc.add_pair_force(tid, t.j, t.k, b2, dE_db2);
        acc.add_pair_force(tid, t.k, t.l, b3, dE_db3);
      }
    }
    acc.add_energy(tid, EnergyTerm::kTorsion, energy);
  });
  return acc.energies()[static_cast<std::size_t>(EnergyTerm::kTorsion)];
}

double energy_forces_hbond(const HBondList& hbonds, const BondList& bonds, std::span<const int> types,
                           const ForceField& ff, PrivatizedAccumulator& acc, const ExecContext& ctx) {
  const auto& hp = ff.hbond;
  const SmoothSwitch radial_switch{hp.switch_start, hp.cutoff};
  ctx.for_each(hbonds.num_atoms(), [&](std::size_t b, std::size_t e, int tid) {
    auto& dbo = acc.bond_derivative(tid);
    double energy = 0.0;
    for (std::size_t h = b; h < e; ++h) {
      if (hbonds.row(h).empty() || hp.strength == 0.0) continue;
      for (std::size_t eb = bonds.offsets[h]; eb < bonds.offsets[h + 1]; ++eb) {
        const auto& xh = bonds.entries[eb];
        if (!is_donor_bond(xh, types, ff)) continue;
        const double g = bo_ramp(xh.bo, hp.donor_bo);
        const double gp = bo_ramp_derivative(xh.bo, hp.donor_bo);
        const Vec3& b1 = xh.d;  // r_X - r_H
        check_length(dot(b1, b1), "hydrogen bond");
        for (const auto& acc_z : hbonds.row(h)) {
          if (acc_z.z == xh.j) continue;
          const Vec3& b2 = acc_z.d;  // r_Z - r_H
          check_length(dot(b2, b2), "hydrogen bond");
          const double r = norm(b2);
          const auto cg = cosine_with_gradient(b1, b2);
          const double half = 0.5 * (1.0 - cg.c);
          const double s4 = half * half;       // sin⁴(θ/2)
          const double ds4_dc = -half;
          const double u = r / hp.r_eq + hp.r_eq / r - 2.0;
          const double ex = std::exp(-u);
          const double sw = radial_switch.value(r);
          const double radial = ex * sw;
          const double du_dr = 1.0 / hp.r_eq - hp.r_eq / (r * r);
          const double dradial_dr = -du_dr * ex * sw + ex * radial_switch.derivative(r);

          energy += hp.strength * g * radial * s4;
          dbo[eb] += hp.strength * gp * radial * s4;

          const double pre = hp.strength * g;
          const Vec3 dE_db1 = cg.dc_da * (pre * radial * ds4_dc);
          const Vec3 dE_db2 = cg.dc_db * (pre * radial * ds4_dc) + b2 * (pre * dradial_dr * s4 / r);
          acc.add_pair_force(tid, h, xh.j, b1, dE_db1);
          acc.add_pair_force(tid, h, acc_z.z, b2, dE_db2);
        }
      }
    }
    acc.add_energy(tid, EnergyTerm::kHBond, energy);
  });
  return acc.energies()[static_cast<std::size_t>(EnergyTerm::kHBond)];
}

BondedEnergies energy_forces_bonded(const BondList& bonds, const Overcoordination& over, std::span<const int> types,
                                    const ForceField& ff, PrivatizedAccumulator& acc, const ExecContext& ctx,
                                    bool include_bond, bool include_over) {
  const std::size_t n = bonds.num_atoms();
  const auto& dbo_buffers = acc.bond_derivatives();
  const int nt = dbo_buffers.threads();

  // Total ∂E/∂BO per bond, mirrored into both entries.
  std::vector<double> de_dbo(bonds.num_entries(), 0.0);
  ctx.for_each(n, [&](std::size_t b, std::size_t e, int tid) {
    double e_bond = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      for (std::size_t k = bonds.offsets[i]; k < bonds.offsets[i + 1]; ++k) {
        const auto& entry = bonds.entries[k];
        if (entry.j < i) continue;
        double sum = 0.0;
        for (int t = 0; t < nt; ++t) sum += dbo_buffers.local(t)[k] + dbo_buffers.local(t)[entry.sym];
        if (include_bond) {
          const double depth = ff.pair(types[i], types[entry.j]).bond_depth;
          e_bond -= depth * entry.bo;
          sum -= depth;
        }
        de_dbo[k] = sum;
        de_dbo[entry.sym] = sum;
      }
    }
    acc.add_energy(tid, EnergyTerm::kBond, e_bond);
  });

  // ∂E/∂Δ_a through f_a (and E_over directly).
  std::vector<double> de_ddelta(n, 0.0);
  ctx.for_each(n, [&](std::size_t b, std::size_t e, int tid) {
    double e_over = 0.0;
    for (std::size_t a = b; a < e; ++a) {
      const double slope = softplus_slope(over.delta[a], ff.softplus_k);
      double s = 0.0;
      for (std::size_t k = bonds.offsets[a]; k < bonds.offsets[a + 1]; ++k) s += de_dbo[k] * bonds.entries[k].bo;
      double d = -ff.lambda * slope * s;
      if (include_over) {
        e_over += ff.p_over * softplus(over.delta[a], ff.softplus_k);
        d += ff.p_over * slope;
      }
      de_ddelta[a] = d;
    }
    acc.add_energy(tid, EnergyTerm::kOver, e_over);
  });

  ctx.for_each(n, [&](std::size_t b, std::size_t e, int tid) {
    for (std::size_t i = b; i < e; ++i) {
      for (std::size_t k = bonds.offsets[i]; k < bonds.offsets[i + 1]; ++k) {
        const auto& entry = bonds.entries[k];
        if (entry.j < i) continue;
        const std::size_t j = entry.j;
        const double de_draw = de_dbo[k] * over.factor[i] * over.factor[j] + de_ddelta[i] + de_ddelta[j];
        const double de_dr = de_draw * entry.dbo_raw_dr;
        if (de_dr == 0.0) continue;
        acc.add_pair_force(tid, i, j, entry.d, entry.d * (de_dr / entry.r));
      }
    }
  });

  const auto totals = acc.energies();
  return {totals[static_cast<std::size_t>(EnergyTerm::kBond)], totals[static_cast<std::size_t>(EnergyTerm::kOver)]};
}

PairMix mix_pair(const AtomType& a, const AtomType& b) {
  return {std::sqrt(a.vdw_depth * b.vdw_depth), std::sqrt(a.vdw_alpha * b.vdw_alpha),
          std::sqrt(a.vdw_radius * b.vdw_radius), std::sqrt(a.gamma * b.gamma)};
}

double shielded_coulomb_kernel(double r, double gamma, const ForceField& ff) {
  const double shield = 1.0 / (gamma * gamma * gamma);
  return ff.coulomb * ff.taper.value(r) * std::cbrt(1.0 / (r * r * r + shield));
}

NonbondedEnergies energy_forces_nonbonded(const HalfNeighborList& nbrs, std::span<const int> types,
                                          std::span<const double> charges, const ForceField& ff,
                                          PrivatizedAccumulator& acc, const ExecContext& ctx, bool include_vdw,
                                          bool include_coulomb) {
  const std::size_t nt = ff.num_types();
  std::vector<PairMix> mix(nt * nt);
  for (std::size_t a = 0; a < nt; ++a) {
    for (std::size_t b = 0; b < nt; ++b) mix[a * nt + b] = mix_pair(ff.types[a], ff.types[b]);
  }
  const double cutoff = ff.r_nonb;

  ctx.for_each(nbrs.num_atoms(), [&](std::size_t b, std::size_t e, int tid) {
    double e_vdw = 0.0;
    double e_coul = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      const double qi = charges[i];
      for (const auto& nb : nbrs.row(i)) {
        const double r = nb.r;
        if (r >= cutoff) continue;
        const std::size_t j = nb.j;
        const auto& m = mix[static_cast<std::size_t>(types[i]) * nt + static_cast<std::size_t>(types[j])];
        const double tap = ff.taper.value(r);
        const double dtap = ff.taper.derivative(r);
        double de_dr = 0.0;
        if (include_vdw && m.depth != 0.0) {
          const double ex = std::exp(-m.alpha * (r - m.radius));
          const double ev = m.depth * (ex * ex - 2.0 * ex);
          const double dev = 2.0 * m.alpha * m.depth * (ex - ex * ex);
          e_vdw += ev * tap;
          de_dr += dev * tap + ev * dtap;
        }
        if (include_coulomb) {
          const double qq = qi * charges[j];
          if (qq != 0.0) {
            const double r3 = r * r * r;
            const double s = std::cbrt(1.0 / (r3 + 1.0 / (m.gamma * m.gamma * m.gamma)));
            const double ds = -r * r * s * s * s * s;
            const double pre = ff.coulomb * qq;
            e_coul += pre * s * tap;
            de_dr += pre * (ds * tap + s * dtap);
          }
        }
        if (de_dr != 0.0) acc.add_pair_force(tid, i, j, nb.d, nb.d * (de_dr / r));
      }
    }
    acc.add_energy(tid, EnergyTerm::kVdw, e_vdw);
    acc.add_energy(tid, EnergyTerm::kCoulomb, e_coul);
  });
  const auto totals = acc.energies();
  return {totals[static_cast<std::size_t>(EnergyTerm::kVdw)], totals[static_cast<std::size_t>(EnergyTerm::kCoulomb)]};
}

double polarization_energy(std::span<const int> types, std::span<const double> charges, const ForceField& ff) {
  double e = 0.0;
  for (std::size_t i = 0; i < charges.size(); ++i) {
    const auto& t = ff.types[static_cast<std::size_t>(types[i])];
    e += t.chi * charges[i] + 0.5 * t.eta * charges[i] * charges[i];
  }
  return e;
}

}  // namespace reaxkit
