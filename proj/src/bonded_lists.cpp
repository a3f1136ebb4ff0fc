#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>

#include "reaxkit/bonded.hpp"
#include "reaxkit/error.hpp"

namespace reaxkit {
namespace {

/// Per-atom fixed-capacity slabs filled concurrently.  reserve() is the only
/// synchronised operation: a single counter increment for the target row.
template <typename Entry>
class SlotSlab {
 public:
  SlotSlab(std::size_t atoms, std::size_t capacity)
      : capacity_(capacity), counts_(std::make_unique<std::atomic<std::uint32_t>[]>(atoms)), slots_(atoms * capacity),
        atoms_(atoms) {
    for (std::size_t i = 0; i < atoms; ++i) counts_[i].store(0, std::memory_order_relaxed);
  }

  /// Returns the slot for row i, or nullptr on overflow (recorded).
  Entry* reserve(std::size_t i) {
    const std::uint32_t slot = counts_[i].fetch_add(1, std::memory_order_relaxed);
    if (slot >= capacity_) {
      std::size_t expected = kNone;
      overflow_atom_.compare_exchange_strong(expected, i);
      return nullptr;
    }
    return &slots_[i * capacity_ + slot];
  }

  void throw_if_overflowed(const char* list) const {
    // Report the lowest overflowing atom so the message is deterministic.
    if (overflow_atom_.load() == kNone) return;
    for (std::size_t i = 0; i < atoms_; ++i) {
      if (counts_[i].load() > capacity_) throw CapacityError(list, i, capacity_);
    }
  }

  std::size_t count(std::size_t i) const { return counts_[i].load(std::memory_order_relaxed); }
  const Entry* row(std::size_t i) const { return &slots_[i * capacity_]; }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t capacity_;
  std::unique_ptr<std::atomic<std::uint32_t>[]> counts_;
  std::vector<Entry> slots_;
  std::size_t atoms_;
  std::atomic<std::size_t> overflow_atom_{kNone};
};

template <typename Entry, typename Key>
void compact_rows(const SlotSlab<Entry>& slab, std::size_t n, std::vector<std::size_t>& offsets,
                  std::vector<Entry>& entries, const ExecContext& ctx, Key key) {
  offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + slab.count(i);
  entries.resize(offsets[n]);
  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      const Entry* src = slab.row(i);
      auto first = entries.begin() + static_cast<std::ptrdiff_t>(offsets[i]);
      std::copy(src, src + slab.count(i), first);
      std::sort(first, first + static_cast<std::ptrdiff_t>(slab.count(i)),
                [&](const Entry& a, const Entry& c) { return key(a) < key(c); });
    }
  });
}

}  // namespace

double softplus(double x, double k) {
  const double kx = k * x;
  return (std::max(kx, 0.0) + std::log1p(std::exp(-std::abs(kx)))) / k;
}

double softplus_slope(double x, double k) {
  const double kx = k * x;
  if (kx >= 0.0) return 1.0 / (1.0 + std::exp(-kx));
  const double e = std::exp(kx);
  return e / (1.0 + e);
}

double bo_ramp(double b, double cut) {
  if (b <= cut) return 0.0;
  const double x = (b - cut) / (1.0 - cut);
  return x * x;
}

double bo_ramp_derivative(double b, double cut) {
  if (b <= cut) return 0.0;
  const double w = 1.0 - cut;
  return 2.0 * (b - cut) / (w * w);
}

BondList build_bond_list_fixed(const HalfNeighborList& nbrs, std::span<const int> types, const ForceField& ff,
                               const ExecContext& ctx, std::size_t capacity) {
  const std::size_t n = nbrs.num_atoms();
  SlotSlab<BondEntry> slab(n, capacity);

  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      for (const auto& nb : nbrs.row(i)) {
        if (nb.r > ff.r_bond) continue;
        const std::size_t j = nb.j;
        const auto& pp = ff.pair(types[i], types[j]);
        if (!pp.bonding) continue;
        const double bo = raw_bond_order(pp, nb.r, ff.r_bond);
        if (bo < pp.bo_cut) continue;
        const double dbo = raw_bond_order_derivative(pp, nb.r, ff.r_bond);
        BondEntry* si = slab.reserve(i);
        BondEntry* sj = slab.reserve(j);
        if (si != nullptr) *si = BondEntry{static_cast<std::uint32_t>(j), 0, nb.r, nb.d, bo, bo, dbo};
        if (sj != nullptr) *sj = BondEntry{static_cast<std::uint32_t>(i), 0, nb.r, -nb.d, bo, bo, dbo};
      }
    }
  });
  slab.throw_if_overflowed("bond list");

  BondList list;
  compact_rows(slab, n, list.offsets, list.entries, ctx, [](const BondEntry& x) { return x.j; });

  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      for (std::size_t k = list.offsets[i]; k < list.offsets[i + 1]; ++k) {
        const std::size_t j = list.entries[k].j;
        const auto first = list.entries.begin() + static_cast<std::ptrdiff_t>(list.offsets[j]);
        const auto last = list.entries.begin() + static_cast<std::ptrdiff_t>(list.offsets[j + 1]);
        const auto it = std::lower_bound(first, last, i, [](const BondEntry& x, std::size_t v) { return x.j < v; });
        list.entries[k].sym = static_cast<std::uint32_t>(it - list.entries.begin());
      }
    }
  });
  return list;
}

BondList build_bond_list(const HalfNeighborList& nbrs, std::span<const int> types, const ForceField& ff,
                         const ExecContext& ctx, std::size_t capacity) {
  for (;;) {
    try {
      return build_bond_list_fixed(nbrs, types, ff, ctx, capacity);
    } catch (const CapacityError&) {
      if (capacity >= nbrs.num_atoms()) throw;
      capacity *= 2;
    }
  }
}

Overcoordination correct_bond_orders(BondList& bonds, std::span<const int> types, const ForceField& ff,
                                     const ExecContext& ctx) {
  const std::size_t n = bonds.num_atoms();
  Overcoordination over;
  over.delta.resize(n);
  over.factor.resize(n);
  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      double sum = 0.0;
      for (const auto& bond : bonds.row(i)) sum += bond.bo_raw;
      over.delta[i] = sum - ff.types[static_cast<std::size_t>(types[i])].valence;
      over.factor[i] = std::exp(-ff.lambda * softplus(over.delta[i], ff.softplus_k));
    }
  });
  // Compute once on the i<j entry and mirror so both directions are identical.
  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      for (std::size_t k = bonds.offsets[i]; k < bonds.offsets[i + 1]; ++k) {
        auto& entry = bonds.entries[k];
        if (entry.j < i) continue;
        entry.bo = entry.bo_raw * over.factor[i] * over.factor[entry.j];
      }
    }
  });
  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      for (std::size_t k = bonds.offsets[i]; k < bonds.offsets[i + 1]; ++k) {
        auto& entry = bonds.entries[k];
        if (entry.j > i) continue;
        entry.bo = bonds.entries[entry.sym].bo;
      }
    }
  });
  return over;
}

bool is_donor_bond(const BondEntry& e, std::span<const int> types, const ForceField& ff) {
  return ff.types[static_cast<std::size_t>(types[e.j])].is_hbond_donor() && e.bo >= ff.hbond.donor_bo;
}

HBondList build_hbond_list(const HalfNeighborList& nbrs, const BondList& bonds, std::span<const int> types,
                           const ForceField& ff, const ExecContext& ctx, std::size_t capacity) {
  const std::size_t n = nbrs.num_atoms();
  std::vector<unsigned char> donor_h(n, 0);
  std::vector<unsigned char> acceptor(n, 0);
  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& t = ff.types[static_cast<std::size_t>(types[i])];
      acceptor[i] = t.is_hbond_acceptor() ? 1 : 0;
      if (!t.is_hbond_hydrogen()) continue;
      for (const auto& bond : bonds.row(i)) {
        if (is_donor_bond(bond, types, ff)) {
          donor_h[i] = 1;
          break;
        }
      }
    }
  });

  for (;;) {
    SlotSlab<HBondAcceptor> slab(n, capacity);
    const double cut = ff.hbond.cutoff;
    ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
      for (std::size_t i = b; i < e; ++i) {
        for (const auto& nb : nbrs.row(i)) {
          if (nb.r > cut) continue;
          const std::size_t j = nb.j;
          if (donor_h[i] && acceptor[j]) {
            if (auto* s = slab.reserve(i)) *s = HBondAcceptor{static_cast<std::uint32_t>(j), nb.r, nb.d};
          }
          if (donor_h[j] && acceptor[i]) {
            if (auto* s = slab.reserve(j)) *s = HBondAcceptor{static_cast<std::uint32_t>(i), nb.r, -nb.d};
          }
        }
      }
    });
    try {
      slab.throw_if_overflowed("hydrogen-bond list");
    } catch (const CapacityError&) {
      if (capacity >= n) throw;
      capacity *= 2;
      continue;
    }
    HBondList list;
    compact_rows(slab, n, list.offsets, list.entries, ctx, [](const HBondAcceptor& x) { return x.z; });
    return list;
  }
}

AngleList build_angle_list(const BondList& bonds, const ForceField& ff, const ExecContext& ctx) {
  const std::size_t n = bonds.num_atoms();
  const double cut = ff.thb_cut;
  AngleList list;
  list.offsets.assign(n + 1, 0);

  // Counting pass: b qualifying bonds give b(b-1)/2 angles.
  std::vector<std::size_t> counts(n, 0);
  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t j = b; j < e; ++j) {
      std::size_t q = 0;
      for (const auto& bond : bonds.row(j)) q += bond.bo >= cut ? 1 : 0;
      counts[j] = q * (q - (q > 0 ? 1 : 0)) / 2;
    }
  });
  for (std::size_t j = 0; j < n; ++j) list.offsets[j + 1] = list.offsets[j] + counts[j];
  list.angles.resize(list.offsets[n]);

  // Fill pass into disjoint per-centre segments.
  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t j = b; j < e; ++j) {
      std::size_t out = list.offsets[j];
      const std::size_t first = bonds.offsets[j];
      const std::size_t last = bonds.offsets[j + 1];
      for (std::size_t a = first; a < last; ++a) {
        const auto& ba = bonds.entries[a];
        if (ba.bo < cut) continue;
        for (std::size_t c = a + 1; c < last; ++c) {
          const auto& bc = bonds.entries[c];
          if (bc.bo < cut) continue;
          // rows are sorted by partner index, so ba.j < bc.j
          list.angles[out++] = Angle{ba.j,
                                     static_cast<std::uint32_t>(j),
                                     bc.j,
                                     static_cast<std::uint32_t>(a),
                                     static_cast<std::uint32_t>(c),
                                     bo_ramp(ba.bo, cut),
                                     bo_ramp(bc.bo, cut)};
        }
      }
    }
  });
  return list;
}

TorsionList build_torsion_list(const AngleList& angles, const ExecContext& ctx) {
  const std::size_t n = angles.num_atoms();
  TorsionList list;
  list.offsets.assign(n + 1, 0);

  // visit(torsion) for every torsion whose central bond is j-k with j < k.
  auto enumerate = [&](std::size_t j, auto&& visit) {
    for (const auto& aj : angles.centred_on(j)) {
      // Either end of the angle at j can serve as k.
      for (int side = 0; side < 2; ++side) {
        const std::uint32_t k = side == 0 ? aj.k : aj.i;
        const std::uint32_t i = side == 0 ? aj.i : aj.k;
        const std::uint32_t bond_jk = side == 0 ? aj.bond_jk : aj.bond_ji;
        const std::uint32_t bond_ji = side == 0 ? aj.bond_ji : aj.bond_jk;
        if (k <= j) continue;
        for (const auto& ak : angles.centred_on(k)) {
          std::uint32_t l = 0;
          std::uint32_t bond_kl = 0;
          if (ak.i == j) {
            l = ak.k;
            bond_kl = ak.bond_jk;
          } else if (ak.k == j) {
            l = ak.i;
            bond_kl = ak.bond_ji;
          } else {
            continue;
          }
          if (l == i) continue;
          visit(Torsion{i, static_cast<std::uint32_t>(j), k, l, bond_ji, bond_jk, bond_kl});
        }
      }
    }
  };

  std::vector<std::size_t> counts(n, 0);
  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t j = b; j < e; ++j) enumerate(j, [&](const Torsion&) { ++counts[j]; });
  });
  for (std::size_t j = 0; j < n; ++j) list.offsets[j + 1] = list.offsets[j] + counts[j];
  list.torsions.resize(list.offsets[n]);
  ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t j = b; j < e; ++j) {
      std::size_t out = list.offsets[j];
      enumerate(j, [&](const Torsion& t) { list.torsions[out++] = t; });
    }
  });
  return list;
}

}  // namespace reaxkit
