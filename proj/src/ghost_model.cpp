#include "reaxkit/ghost_model.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "reaxkit/error.hpp"

namespace reaxkit {
namespace {

double cube(double x) { return x * x * x; }

double shell_ratio(double edge, double g) { return (cube(edge + g) - cube(edge)) / cube(edge); }

}  // namespace

void validate(const DecompositionSpec& spec) {
  if (spec.n < 1) throw InputError("node count must be at least 1");
  if (spec.c < 1) throw InputError("c must be at least 1");
  if (!(spec.d > 0.0)) throw InputError("subdomain edge d must be positive");
  if (!(spec.g >= 0.0)) throw InputError("ghost thickness g must be non-negative");
}

DecompositionSpec make_decomposition(int n, int t, double d, double g) {
  if (t < 1) throw InputError("threads per node must be at least 1");
  int c = static_cast<int>(std::lround(std::cbrt(static_cast<double>(t))));
  if (c * c * c != t) throw InputError("threads per node " + std::to_string(t) + " is not a perfect cube");
  DecompositionSpec spec{n, c, d, g};
  validate(spec);
  return spec;
}

double ghost_volume_mpi(const DecompositionSpec& spec) {
  validate(spec);
  const double cd = spec.c * spec.d;
  return spec.n * (cube(cd + spec.c * spec.g) - cube(cd));
}

double ghost_volume_hybrid(const DecompositionSpec& spec) {
  validate(spec);
  const double cd = spec.c * spec.d;
  return spec.n * (cube(cd + spec.g) - cube(cd));
}

std::vector<RatioRow> ratio_table(std::span<const double> d_over_g, std::span<const double> t) {
  if (d_over_g.empty() || t.empty()) throw InputError("ratio table needs at least one d/g and one t value");
  std::vector<RatioRow> rows;
  rows.reserve(d_over_g.size() * t.size());
  for (double tv : t) {
    if (!(tv >= 1.0)) throw InputError("thread count t must be at least 1");
    const double c = std::cbrt(tv);
    for (double dg : d_over_g) {
      if (!(dg > 0.0)) throw InputError("d/g must be positive");
      rows.push_back({tv, dg, shell_ratio(dg, 1.0), shell_ratio(c * dg, 1.0)});
    }
  }
  return rows;
}

void write_ratio_csv(std::ostream& out, std::span<const RatioRow> rows) {
  out << "t,d_over_g,ratio_mpi,ratio_hybrid\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%g,%g,%.10g,%.10g\n", r.t, r.d_over_g, r.ratio_mpi, r.ratio_hybrid);
    out << buf;
  }
}

}  // namespace reaxkit
