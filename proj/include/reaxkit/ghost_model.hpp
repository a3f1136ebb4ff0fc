#pragma once

// Ghost-region volume of a cubic domain decomposition.  With t = c³ threads
// per node, pure message passing gives every rank its own subdomain of edge
// d and ghost shell g; the hybrid scheme gives one rank per node a domain of
// edge c·d shared by its threads, so only one shell per node remains.

#include <iosfwd>
#include <span>
#include <vector>

namespace reaxkit {

struct DecompositionSpec {
  int n = 1;       // nodes
  int c = 1;       // threads per node t = c³
  double d = 1.0;  // per-process subdomain edge
  double g = 0.0;  // ghost thickness

  int threads() const { return c * c * c; }
};

/// Builds a spec from a thread count; throws InputError unless t is a
/// perfect cube and the remaining invariants hold.
DecompositionSpec make_decomposition(int n, int t, double d, double g);
void validate(const DecompositionSpec& spec);

/// n·((cd + cg)³ - (cd)³)
double ghost_volume_mpi(const DecompositionSpec& spec);
/// n·((cd + g)³ - (cd)³)
double ghost_volume_hybrid(const DecompositionSpec& spec);

struct RatioRow {
  double t = 1.0;
  double d_over_g = 1.0;
  double ratio_mpi = 0.0;
  double ratio_hybrid = 0.0;
};

/// Ghost-to-domain volume ratios with g = 1 and d = d/g.  c = t^(1/3) may be
/// fractional here.  Rows are ordered by t, then d/g, as given.
std::vector<RatioRow> ratio_table(std::span<const double> d_over_g, std::span<const double> t);

/// CSV `t,d_over_g,ratio_mpi,ratio_hybrid`.
void write_ratio_csv(std::ostream& out, std::span<const RatioRow> rows);

}  // namespace reaxkit
