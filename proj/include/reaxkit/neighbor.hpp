#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reaxkit/core.hpp"
#include "reaxkit/parallel.hpp"

namespace reaxkit {

/// Uniform cell decomposition of the box with cell side >= cutoff.  Atoms are
/// bucketed by counting sort, so bucket contents are in ascending atom order.
struct CellGrid {
  std::array<int, 3> dims{1, 1, 1};
  Vec3 cell_size{};
  std::vector<std::size_t> offsets;  // num_cells + 1
  std::vector<std::size_t> atoms;
  std::vector<int> atom_cell;

  std::size_t num_cells() const { return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]; }
  std::span<const std::size_t> bucket(std::size_t c) const {
    return {atoms.data() + offsets[c], offsets[c + 1] - offsets[c]};
  }
  /// Distinct cells (including c) whose atoms can lie within one cell side of c.
  std::vector<std::size_t> neighbor_cells(std::size_t c, const SimBox& box) const;
};

CellGrid build_cell_grid(const SystemState& state, const SimBox& box, double cutoff);

struct NeighborEntry {
  std::uint32_t j = 0;
  double r = 0.0;
  Vec3 d{};  // min_image(r_j - r_i)
};

/// CSR half list: row i holds every j > i within the cutoff, sorted by j.
struct HalfNeighborList {
  std::vector<std::size_t> offsets;  // N + 1
  std::vector<NeighborEntry> entries;
  double cutoff = 0.0;
  long build_step = -1;

  std::size_t num_atoms() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t num_pairs() const { return entries.size(); }
  std::span<const NeighborEntry> row(std::size_t i) const {
    return {entries.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
};

/// Count pass, exclusive prefix sum, fill pass; parallel over cells.
HalfNeighborList build_half_neighbor_list(const SystemState& state, const SimBox& box, const CellGrid& grid,
                                          double cutoff, const ExecContext& ctx);

/// Recomputes r and d of every stored pair for the current positions.  Pairs
/// are not added or removed; r may exceed the cutoff until the next rebuild.
void refresh_neighbor_distances(HalfNeighborList& list, const SystemState& state, const SimBox& box,
                                const ExecContext& ctx);

/// True iff step is a multiple of the re-neighbouring interval.
bool needs_rebuild(long step, int reneighbor_every);

}  // namespace reaxkit
