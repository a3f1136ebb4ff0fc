#pragma once

// Shared fixtures and brute-force oracles for the test binaries.

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "reaxkit/core.hpp"
#include "reaxkit/engine.hpp"
#include "reaxkit/parallel.hpp"

namespace rkt {

using namespace reaxkit;

std::string data_path(const std::string& name);
const ForceField& chon_ff();
const ForceField& water_ff();

/// A pool plus context; perf counters optional.
struct Exec {
  explicit Exec(int threads, SchedulePolicy policy = {}) : pool(threads), ctx{&pool, policy, nullptr} {}
  ThreadPool pool;
  ExecContext ctx;
};

struct RandomSystemSpec {
  std::size_t atoms = 32;
  double box = 22.0;
  bool periodic = true;
  double region = 0.0;    // side of the cube the atoms are drawn from (0: whole box)
  double min_dist = 0.9;  // rejection distance
  std::vector<std::string> elements{"C", "H", "O", "N"};
};

System random_system(const ForceField& ff, const RandomSystemSpec& spec, std::mt19937_64& rng);

/// Water molecules on a jittered grid, as in the MD fixture.
System load_water216();

using Pair = std::pair<std::uint32_t, std::uint32_t>;
using Triple = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>;
using Quad = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t>;

/// O(N²) minimum-image pair enumeration, i < j, r <= cutoff.
std::set<Pair> brute_pairs(const SystemState& state, const SimBox& box, double cutoff);

/// Independent recomputation of the bond model from positions.
struct BruteBonds {
  std::size_t n = 0;
  std::vector<std::vector<double>> raw;   // dense BO_raw (0 when not bonded)
  std::vector<std::vector<double>> bo;    // corrected
  std::vector<double> delta;
  std::set<Pair> bonds;                   // i < j
};
BruteBonds brute_bonds(const SystemState& state, const SimBox& box, const ForceField& ff);

/// (i, j, k) with centre j, i < k, both corrected BOs >= thb_cut.
std::set<Triple> brute_angles(const BruteBonds& b, const ForceField& ff);
/// (i, j, k, l) with j < k and angles (i,j,k), (j,k,l) present, i != l.
std::set<Quad> brute_torsions(const BruteBonds& b, const ForceField& ff);

/// n per-index costs where the first 20% of indices carry 80% of the total.
std::vector<double> skewed_costs(std::size_t n);

/// max / mean of the assigned costs.
double imbalance(const std::vector<double>& assigned);

class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  std::size_t find(std::size_t a);
  void unite(std::size_t a, std::size_t b);

 private:
  std::vector<std::size_t> parent_;
};

/// Frozen-charge energy and forces through the full pipeline.
struct Evaluation {
  EnergyBreakdown energy;
  std::vector<Vec3> force;
};
Evaluation evaluate_frozen(const ForceField& ff, System system, const ExecContext& ctx,
                           TermMask mask = TermMask::all());

/// Charges equilibrated once (for use as frozen charges).
std::vector<double> equilibrated_charges(const ForceField& ff, System system, const ExecContext& ctx);

}  // namespace rkt
