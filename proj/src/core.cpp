#include "reaxkit/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reaxkit/error.hpp"

namespace reaxkit {

Vec3 min_image(Vec3 dr, const SimBox& box) {
  for (int k = 0; k < 3; ++k) {
    if (!box.periodic[k]) continue;
    const double len = box.lengths[k];
    dr[k] -= len * std::floor(dr[k] / len + 0.5);
    // floor() can round a value a hair below L/2 up to exactly L/2.
    if (dr[k] >= 0.5 * len) dr[k] -= len;
  }
  return dr;
}

Vec3 wrap_position(Vec3 r, const SimBox& box) {
  for (int k = 0; k < 3; ++k) {
    if (!box.periodic[k]) continue;
    const double len = box.lengths[k];
    r[k] -= len * std::floor(r[k] / len);
    if (r[k] >= len) r[k] = 0.0;
  }
  return r;
}

void validate_box(const SimBox& box, double nonbonded_cutoff) {
  for (int k = 0; k < 3; ++k) {
    if (!(box.lengths[k] > 0.0)) throw InputError("box lengths must be positive");
    if (box.periodic[k] && box.lengths[k] < 2.0 * nonbonded_cutoff) {
      throw InputError("periodic box length " + std::to_string(box.lengths[k]) +
                       " is smaller than twice the nonbonded cutoff");
    }
  }
}

Taper::Taper(double cutoff) : cutoff_(cutoff) {
  const double r4 = std::pow(cutoff, 4);
  coeff_ = {1.0, 0.0, 0.0, 0.0, -35.0 / r4, 84.0 / (r4 * cutoff), -70.0 / (r4 * cutoff * cutoff),
            20.0 / (r4 * cutoff * cutoff * cutoff)};
}

double Taper::value(double r) const {
  if (r >= cutoff_) return 0.0;
  double t = coeff_[7];
  for (int k = 6; k >= 0; --k) t = t * r + coeff_[k];
  return t;
}

double Taper::derivative(double r) const {
  if (r >= cutoff_) return 0.0;
  double t = 7.0 * coeff_[7];
  for (int k = 6; k >= 1; --k) t = t * r + k * coeff_[k];
  return t;
}

double SmoothSwitch::value(double r) const {
  if (r <= start) return 1.0;
  if (r >= stop) return 0.0;
  const double x = (r - start) / (stop - start);
  const double x4 = x * x * x * x;
  return 1.0 + x4 * (-35.0 + x * (84.0 + x * (-70.0 + 20.0 * x)));
}

double SmoothSwitch::derivative(double r) const {
  if (r <= start || r >= stop) return 0.0;
  const double w = stop - start;
  const double x = (r - start) / w;
  // 140 x³ (x - 1)³
  const double xm = x - 1.0;
  return 140.0 * x * x * x * xm * xm * xm / w;
}

int ForceField::find_type(std::string_view symbol) const {
  for (std::size_t t = 0; t < types.size(); ++t) {
    if (types[t].symbol == symbol) return static_cast<int>(t);
  }
  return -1;
}

void ForceField::validate() const {
  const std::size_t n = types.size();
  if (n == 0) throw InputError("force field defines no atom types");
  if (pairs.size() != n * n || angles.size() != n) throw InputError("force field tables are not sized to the type count");
  for (const auto& t : types) {
    if (!(t.mass > 0.0)) throw InputError("atom type " + t.symbol + ": mass must be > 0");
    if (!(t.valence > 0.0)) throw InputError("atom type " + t.symbol + ": valence must be > 0");
    if (!(t.eta > 0.0)) throw InputError("atom type " + t.symbol + ": eta must be > 0");
    if (!(t.gamma > 0.0)) throw InputError("atom type " + t.symbol + ": gamma must be > 0");
    if (!(t.vdw_depth >= 0.0)) throw InputError("atom type " + t.symbol + ": vdw_D must be >= 0");
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const auto& p = pair(static_cast<int>(a), static_cast<int>(b));
      const auto& q = pair(static_cast<int>(b), static_cast<int>(a));
      if (p.bonding != q.bonding || p.r0 != q.r0 || p.p_bo1 != q.p_bo1 || p.p_bo2 != q.p_bo2 ||
          p.bond_depth != q.bond_depth || p.bo_cut != q.bo_cut) {
        throw InputError("pair table is not symmetric for " + types[a].symbol + "-" + types[b].symbol);
      }
      if (!p.bonding) continue;
      const std::string name = types[a].symbol + "-" + types[b].symbol;
      if (!(p.p_bo1 < 0.0)) throw InputError("pair " + name + ": p_bo1 must be < 0");
      if (!(p.p_bo2 >= 1.0)) throw InputError("pair " + name + ": p_bo2 must be >= 1");
      if (!(p.r0 > 0.0)) throw InputError("pair " + name + ": r0 must be > 0");
      if (!(p.bo_cut > 0.0 && p.bo_cut < 1.0)) throw InputError("pair " + name + ": bo_cut must lie in (0,1)");
    }
  }
  if (!(thb_cut > 0.0 && thb_cut < 1.0)) throw InputError("thb_cut must lie in (0,1)");
  if (!(r_nonb > 0.0) || !(r_bond > 0.0)) throw InputError("cutoffs must be positive");
  if (r_bond > r_nonb) throw InputError("bond cutoff exceeds nonbonded cutoff");
  if (!(hbond.cutoff > 0.0)) throw InputError("hbond cutoff must be positive");
  if (hbond.cutoff > r_nonb) throw InputError("hbond cutoff exceeds nonbonded cutoff");
  if (!(hbond.switch_start >= 0.0 && hbond.switch_start < hbond.cutoff)) {
    throw InputError("hbond switch start must lie in [0, cutoff)");
  }
  if (!(hbond.donor_bo > 0.0 && hbond.donor_bo < 1.0)) throw InputError("hbond donor_bo must lie in (0,1)");
  if (!(hbond.r_eq > 0.0)) throw InputError("hbond r0 must be positive");
  if (!(lambda >= 0.0) || !(softplus_k > 0.0)) throw InputError("lambda must be >= 0 and softplus_k > 0");
}

double raw_bond_order(const PairParams& p, double r, double r_bond) {
  if (!p.bonding || r >= r_bond) return 0.0;
  const double bo = std::exp(p.p_bo1 * std::pow(r / p.r0, p.p_bo2));
  const double shift = std::exp(p.p_bo1 * std::pow(r_bond / p.r0, p.p_bo2));
  return std::max(0.0, bo - shift);
}

double raw_bond_order_derivative(const PairParams& p, double r, double r_bond) {
  if (!p.bonding || r >= r_bond) return 0.0;
  const double x = r / p.r0;
  const double xp = std::pow(x, p.p_bo2);
  const double bo = std::exp(p.p_bo1 * xp);
  return bo * p.p_bo1 * p.p_bo2 * xp / r;
}

void SystemState::resize(std::size_t n) {
  type.resize(n, 0);
  position.resize(n);
  velocity.resize(n);
  charge.resize(n, 0.0);
  force.resize(n);
}

System replicate(const SystemState& state, const SimBox& box, int nx, int ny, int nz, std::size_t max_atoms) {
  if (nx < 1 || ny < 1 || nz < 1) throw InputError("replication counts must be positive");
  if (!(box.periodic[0] && box.periodic[1] && box.periodic[2])) throw InputError("replicate requires a periodic box");
  const std::size_t n = state.size();
  const std::size_t copies = static_cast<std::size_t>(nx) * ny * nz;
  if (n != 0 && copies > max_atoms / n) {
    throw InputError("replicated atom count exceeds the configured maximum of " + std::to_string(max_atoms));
  }
  System out;
  out.box = box;
  out.box.lengths = {box.lengths.x * nx, box.lengths.y * ny, box.lengths.z * nz};
  auto& s = out.state;
  s.net_charge = state.net_charge * static_cast<double>(copies);
  s.step = state.step;
  s.resize(n * copies);
  std::size_t dst = 0;
  for (int cz = 0; cz < nz; ++cz) {
    for (int cy = 0; cy < ny; ++cy) {
      for (int cx = 0; cx < nx; ++cx) {
        const Vec3 shift{cx * box.lengths.x, cy * box.lengths.y, cz * box.lengths.z};
        for (std::size_t i = 0; i < n; ++i, ++dst) {
          s.type[dst] = state.type[i];
          s.position[dst] = state.position[i] + shift;
          s.velocity[dst] = state.velocity[i];
          s.charge[dst] = state.charge[i];
        }
      }
    }
  }
  return out;
}

}  // namespace reaxkit
