#include "reaxkit/neighbor.hpp"

#include <algorithm>
#include <cmath>

#include "reaxkit/error.hpp"

namespace reaxkit {
namespace {

int cell_coord(double x, double side, int dims) {
  const int c = static_cast<int>(std::floor(x / side));
  return std::clamp(c, 0, dims - 1);
}

}  // namespace

std::vector<std::size_t> CellGrid::neighbor_cells(std::size_t c, const SimBox& box) const {
  const int cx = static_cast<int>(c % static_cast<std::size_t>(dims[0]));
  const int cy = static_cast<int>((c / static_cast<std::size_t>(dims[0])) % static_cast<std::size_t>(dims[1]));
  const int cz = static_cast<int>(c / (static_cast<std::size_t>(dims[0]) * dims[1]));
  const std::array<int, 3> base{cx, cy, cz};
  std::vector<std::size_t> out;
  out.reserve(27);
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        std::array<int, 3> n{base[0] + dx, base[1] + dy, base[2] + dz};
        bool inside = true;
        for (int k = 0; k < 3; ++k) {
          if (n[k] < 0 || n[k] >= dims[k]) {
            if (!box.periodic[k]) {
              inside = false;
              break;
            }
            n[k] = (n[k] + dims[k]) % dims[k];
          }
        }
        if (!inside) continue;
        out.push_back(static_cast<std::size_t>(n[0]) +
                      static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(n[1]) +
                                                           static_cast<std::size_t>(dims[1]) * n[2]));
      }
    }
  }
  // Grids with fewer than three cells along a periodic axis reach the same
  // cell through more than one offset.
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CellGrid build_cell_grid(const SystemState& state, const SimBox& box, double cutoff) {
  if (!(cutoff > 0.0)) throw InputError("cell grid cutoff must be positive");
  CellGrid grid;
  for (int k = 0; k < 3; ++k) {
    const double len = box.lengths[k];
    if (box.periodic[k] && len < cutoff) {
      throw InputError("box too small for one cell of side " + std::to_string(cutoff) + " along a periodic axis");
    }
    grid.dims[k] = std::max(1, static_cast<int>(std::floor(len / cutoff)));
    grid.cell_size[k] = len / grid.dims[k];
  }
  const std::size_t n = state.size();
  const std::size_t ncell = grid.num_cells();
  grid.atom_cell.resize(n);
  std::vector<std::size_t> counts(ncell + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 r = wrap_position(state.position[i], box);
    const int cx = cell_coord(r.x, grid.cell_size.x, grid.dims[0]);
    const int cy = cell_coord(r.y, grid.cell_size.y, grid.dims[1]);
    const int cz = cell_coord(r.z, grid.cell_size.z, grid.dims[2]);
    const int c = cx + grid.dims[0] * (cy + grid.dims[1] * cz);
    grid.atom_cell[i] = c;
    ++counts[static_cast<std::size_t>(c) + 1];
  }
  grid.offsets.assign(ncell + 1, 0);
  for (std::size_t c = 0; c < ncell; ++c) grid.offsets[c + 1] = grid.offsets[c] + counts[c + 1];
  grid.atoms.resize(n);
  std::vector<std::size_t> cursor(grid.offsets.begin(), grid.offsets.end() - 1);
  for (std::size_t i = 0; i < n; ++i) grid.atoms[cursor[static_cast<std::size_t>(grid.atom_cell[i])]++] = i;
  return grid;
}

HalfNeighborList build_half_neighbor_list(const SystemState& state, const SimBox& box, const CellGrid& grid,
                                          double cutoff, const ExecContext& ctx) {
  const std::size_t n = state.size();
  const std::size_t ncell = grid.num_cells();
  const double cut2 = cutoff * cutoff;

  std::vector<std::vector<std::size_t>> stencils(ncell);
  for (std::size_t c = 0; c < ncell; ++c) stencils[c] = grid.neighbor_cells(c, box);

  // visit(i, j, d, r2) for every j > i within the cutoff, for atoms of cell c.
  auto scan_cell = [&](std::size_t c, auto&& visit) {
    for (std::size_t i : grid.bucket(c)) {
      const Vec3& ri = state.position[i];
      for (std::size_t nc : stencils[c]) {
        for (std::size_t j : grid.bucket(nc)) {
          if (j <= i) continue;
          const Vec3 d = min_image(state.position[j] - ri, box);
          const double r2 = dot(d, d);
          if (r2 <= cut2) visit(i, j, d, r2);
        }
      }
    }
  };

  HalfNeighborList list;
  list.cutoff = cutoff;
  list.build_step = state.step;
  list.offsets.assign(n + 1, 0);

  std::vector<std::size_t> counts(n, 0);
  ctx.for_each(ncell, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t c = b; c < e; ++c) {
      scan_cell(c, [&](std::size_t i, std::size_t, const Vec3&, double) { ++counts[i]; });
    }
  });
  for (std::size_t i = 0; i < n; ++i) list.offsets[i + 1] = list.offsets[i] + counts[i];
  list.entries.resize(list.offsets[n]);

  ctx.for_each(ncell, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t c = b; c < e; ++c) {
      for (std::size_t i : grid.bucket(c)) counts[i] = list.offsets[i];
      scan_cell(c, [&](std::size_t i, std::size_t j, const Vec3& d, double r2) {
        list.entries[counts[i]++] = NeighborEntry{static_cast<std::uint32_t>(j), std::sqrt(r2), d};
      });
      for (std::size_t i : grid.bucket(c)) {
        std::sort(list.entries.begin() + static_cast<std::ptrdiff_t>(list.offsets[i]),
                  list.entries.begin() + static_cast<std::ptrdiff_t>(list.offsets[i + 1]),
                  [](const NeighborEntry& a, const NeighborEntry& b) { return a.j < b.j; });
      }
    }
  });
  return list;
}

void refresh_neighbor_distances(HalfNeighborList& list, const SystemState& state, const SimBox& box,
                                const ExecContext& ctx) {
  ctx.for_each(list.num_atoms(), [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      const Vec3& ri = state.position[i];
      for (std::size_t k = list.offsets[i]; k < list.offsets[i + 1]; ++k) {
        auto& entry = list.entries[k];
        entry.d = min_image(state.position[entry.j] - ri, box);
        entry.r = norm(entry.d);
      }
    }
  });
}

bool needs_rebuild(long step, int reneighbor_every) {
  if (reneighbor_every < 1) throw InputError("reneighbor interval must be >= 1");
  return step % reneighbor_every == 0;
}

}  // namespace reaxkit
