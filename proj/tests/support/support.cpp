#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "reaxkit/bonded.hpp"
#include "reaxkit/io.hpp"

#ifndef REAXKIT_DATA_DIR
#error "REAXKIT_DATA_DIR must be defined"
#endif

namespace rkt {

std::string data_path(const std::string& name) { return std::string(REAXKIT_DATA_DIR) + "/" + name; }

const ForceField& chon_ff() {
  static const ForceField ff = load_forcefield(data_path("chon.ff"));
  return ff;
}

const ForceField& water_ff() {
  static const ForceField ff = load_forcefield(data_path("water.ff"));
  return ff;
}

System load_water216() { return load_system(data_path("water216.xyz"), water_ff()); }

System random_system(const ForceField& ff, const RandomSystemSpec& spec, std::mt19937_64& rng) {
  System sys;
  sys.box.lengths = {spec.box, spec.box, spec.box};
  sys.box.periodic = {spec.periodic, spec.periodic, spec.periodic};
  const double region = spec.region > 0.0 ? spec.region : spec.box;
  const double offset = 0.5 * (spec.box - region);
  std::uniform_real_distribution<double> u(0.0, region);
  std::uniform_int_distribution<std::size_t> pick(0, spec.elements.size() - 1);
  std::vector<Vec3> pos;
  std::vector<int> types;
  std::size_t attempts = 0;
  while (pos.size() < spec.atoms) {
    if (++attempts > 1000000) throw std::runtime_error("random_system: cannot place atoms");
    const Vec3 p{offset + u(rng), offset + u(rng), offset + u(rng)};
    bool ok = true;
    for (const auto& q : pos) {
      if (norm(min_image(p - q, sys.box)) < spec.min_dist) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    pos.push_back(p);
    types.push_back(ff.find_type(spec.elements[pick(rng)]));
  }
  sys.state.resize(pos.size());
  sys.state.position = pos;
  sys.state.type = types;
  return sys;
}

std::set<Pair> brute_pairs(const SystemState& state, const SimBox& box, double cutoff) {
  std::set<Pair> out;
  for (std::size_t i = 0; i < state.size(); ++i) {
    for (std::size_t j = i + 1; j < state.size(); ++j) {
      if (norm(min_image(state.position[j] - state.position[i], box)) <= cutoff) {
        out.insert({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      }
    }
  }
  return out;
}

BruteBonds brute_bonds(const SystemState& state, const SimBox& box, const ForceField& ff) {
  BruteBonds b;
  const std::size_t n = state.size();
  b.n = n;
  b.raw.assign(n, std::vector<double>(n, 0.0));
  b.bo.assign(n, std::vector<double>(n, 0.0));
  b.delta.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& p = ff.pair(state.type[i], state.type[j]);
      if (!p.bonding) continue;
      const double r = norm(min_image(state.position[j] - state.position[i], box));
      if (r > ff.r_bond) continue;
      const double shift = std::exp(p.p_bo1 * std::pow(ff.r_bond / p.r0, p.p_bo2));
      const double raw = std::max(0.0, std::exp(p.p_bo1 * std::pow(r / p.r0, p.p_bo2)) - shift);
      if (raw < p.bo_cut) continue;
      b.raw[i][j] = b.raw[j][i] = raw;
      b.bonds.insert({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    }
  }
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += b.raw[i][j];
    b.delta[i] = s - ff.types[static_cast<std::size_t>(state.type[i])].valence;
    const double k = ff.softplus_k;
    f[i] = std::exp(-ff.lambda * std::log1p(std::exp(k * b.delta[i])) / k);
  }
  for (const auto& [i, j] : b.bonds) b.bo[i][j] = b.bo[j][i] = b.raw[i][j] * f[i] * f[j];
  return b;
}

std::set<Triple> brute_angles(const BruteBonds& b, const ForceField& ff) {
  std::set<Triple> out;
  for (std::uint32_t j = 0; j < b.n; ++j) {
    for (std::uint32_t i = 0; i < b.n; ++i) {
      for (std::uint32_t k = i + 1; k < b.n; ++k) {
        if (i == j || k == j) continue;
        if (b.raw[j][i] > 0.0 && b.raw[j][k] > 0.0 && b.bo[j][i] >= ff.thb_cut && b.bo[j][k] >= ff.thb_cut) {
          out.insert({i, j, k});
        }
      }
    }
  }
  return out;
}

std::set<Quad> brute_torsions(const BruteBonds& b, const ForceField& ff) {
  auto ok = [&](std::uint32_t x, std::uint32_t y) { return b.raw[x][y] > 0.0 && b.bo[x][y] >= ff.thb_cut; };
  std::set<Quad> out;
  for (std::uint32_t j = 0; j < b.n; ++j) {
    for (std::uint32_t k = j + 1; k < b.n; ++k) {
      if (!ok(j, k)) continue;
      for (std::uint32_t i = 0; i < b.n; ++i) {
        if (i == j || i == k || !ok(j, i)) continue;
        for (std::uint32_t l = 0; l < b.n; ++l) {
          if (l == k || l == j || l == i || !ok(k, l)) continue;
          out.insert({i, j, k, l});
        }
      }
    }
  }
  return out;
}

std::vector<double> skewed_costs(std::size_t n) {
  const std::size_t heavy = n / 5;
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = i < heavy ? 0.8 / static_cast<double>(heavy) : 0.2 / static_cast<double>(n - heavy);
  return c;
}

double imbalance(const std::vector<double>& assigned) {
  double mx = 0.0, sum = 0.0;
  for (double a : assigned) {
    mx = std::max(mx, a);
    sum += a;
  }
  return mx / (sum / static_cast<double>(assigned.size()));
}

UnionFind::UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

std::size_t UnionFind::find(std::size_t a) {
  while (parent_[a] != a) {
    parent_[a] = parent_[parent_[a]];
    a = parent_[a];
  }
  return a;
}

void UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a != b) parent_[std::max(a, b)] = std::min(a, b);
}

Evaluation evaluate_frozen(const ForceField& ff, System system, const ExecContext& ctx, TermMask mask) {
  EngineOptions opt;
  opt.solve_charges = false;
  opt.terms = mask;
  ForceEngine engine(ff, opt, ctx);
  if (system.state.charge.size() != system.state.size()) system.state.charge.assign(system.state.size(), 0.0);
  Evaluation out;
  out.energy = engine.compute(system.state, system.box);
  out.force = system.state.force;
  return out;
}

std::vector<double> equilibrated_charges(const ForceField& ff, System system, const ExecContext& ctx) {
  ForceEngine engine(ff, EngineOptions{}, ctx);
  engine.compute(system.state, system.box);
  return system.state.charge;
}

}  // namespace rkt
