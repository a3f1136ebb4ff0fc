#include "reaxkit/species.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "reaxkit/error.hpp"
#include "reaxkit/io.hpp"

namespace reaxkit {
namespace {

std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
  return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

std::uint64_t pair_key(std::uint32_t i, std::uint32_t j) { return (static_cast<std::uint64_t>(i) << 32) | j; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void SpeciesConfig::set_threshold(const std::string& a, const std::string& b, double value) {
  if (value < 0.0) throw InputError("species threshold for " + a + "-" + b + " is negative");
  overrides[ordered(a, b)] = value;
}

double SpeciesConfig::threshold(const std::string& a, const std::string& b) const {
  const auto it = overrides.find(ordered(a, b));
  return it == overrides.end() ? default_threshold : it->second;
}

void SpeciesConfig::validate() const {
  if (nevery < 1) throw InputError("species.nevery must be at least 1");
  if (nfreq < 1) throw InputError("species.nfreq must be at least 1");
  if (nfreq % nevery != 0) throw InputError("species.nfreq must be a multiple of species.nevery");
  if (default_threshold < 0.0) throw InputError("species.threshold is negative");
  for (const auto& [key, value] : overrides) {
    if (value < 0.0) throw InputError("species threshold for " + key.first + "-" + key.second + " is negative");
  }
}

void BondAverager::reset() {
  sums_.clear();
  samples_ = 0;
}

void BondAverager::add(std::uint32_t i, std::uint32_t j, double bo) {
  if (i > j) std::swap(i, j);
  sums_[pair_key(i, j)] += bo;
}

void BondAverager::accumulate(const BondList& bonds) {
  for (std::size_t i = 0; i < bonds.num_atoms(); ++i) {
    for (const auto& e : bonds.row(i)) {
      if (e.j > i && e.bo > 0.0) add(static_cast<std::uint32_t>(i), e.j, e.bo);
    }
  }
  ++samples_;
}

void BondAverager::accumulate(std::span<const SnapshotBond> sample) {
  for (const auto& b : sample) add(b.i, b.j, b.bo);
  ++samples_;
}

BondSnapshot BondAverager::snapshot(long step, std::vector<std::string> elements, int nevery, int nfreq) const {
  BondSnapshot snap;
  snap.step = step;
  snap.samples = samples_;
  snap.nevery = nevery;
  snap.nfreq = nfreq;
  snap.elements = std::move(elements);
  snap.bonds.reserve(sums_.size());
  for (const auto& [key, sum] : sums_) {
    snap.bonds.push_back({static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key & 0xffffffffu),
                          samples_ > 0 ? sum / samples_ : 0.0});
  }
  std::sort(snap.bonds.begin(), snap.bonds.end(),
            [](const SnapshotBond& a, const SnapshotBond& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  return snap;
}

std::vector<Edge> threshold_bonds(const BondSnapshot& snapshot, const SpeciesConfig& config) {
  std::vector<Edge> edges;
  const std::size_t n = snapshot.elements.size();
  for (const auto& b : snapshot.bonds) {
    if (b.i >= n || b.j >= n) throw InputError("snapshot bond refers to atom outside the system");
    if (b.bo > config.threshold(snapshot.elements[b.i], snapshot.elements[b.j])) edges.push_back({b.i, b.j});
  }
  return edges;
}

std::vector<std::uint32_t> assign_molecule_ids(std::span<const Edge> edges, std::size_t num_atoms) {
  std::vector<std::uint32_t> label(num_atoms);
  for (std::size_t i = 0; i < num_atoms; ++i) label[i] = static_cast<std::uint32_t>(i + 1);
  bool changed = !edges.empty();
  std::size_t sweeps = 0;
  while (changed) {
    changed = false;
    for (const auto& e : edges) {
      const std::uint32_t m = std::min(label[e.i], label[e.j]);
      if (label[e.i] != m || label[e.j] != m) {
        label[e.i] = m;
        label[e.j] = m;
        changed = true;
      }
    }
    if (++sweeps > num_atoms + 1) throw Error("internal error: molecule labelling did not reach a fixpoint");
  }
  return label;
}

std::string hill_formula(const std::map<std::string, std::size_t>& counts) {
  std::string out;
  auto append = [&](const std::string& el, std::size_t c) {
    out += el;
    if (c != 1) out += std::to_string(c);
  };
  const auto carbon = counts.find("C");
  if (carbon != counts.end()) {
    append("C", carbon->second);
    const auto hydrogen = counts.find("H");
    if (hydrogen != counts.end()) append("H", hydrogen->second);
    for (const auto& [el, c] : counts) {
      if (el != "C" && el != "H") append(el, c);
    }
  } else {
    for (const auto& [el, c] : counts) append(el, c);
  }
  return out;
}

SpeciesTable renumber_and_classify(std::span<const std::uint32_t> labels, std::span<const std::string> elements) {
  if (labels.size() != elements.size()) throw InputError("label and element counts differ");
  SpeciesTable table;
  std::vector<std::uint32_t> distinct(labels.begin(), labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  table.num_molecules = distinct.size();

  table.molecule.resize(labels.size());
  std::vector<std::map<std::string, std::size_t>> counts(distinct.size());
  for (std::size_t a = 0; a < labels.size(); ++a) {
    const auto id = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), labels[a]) -
                                             distinct.begin());
    table.molecule[a] = static_cast<std::uint32_t>(id + 1);
    ++counts[id][elements[a]];
  }

  std::map<std::string, std::size_t> census;
  for (const auto& c : counts) ++census[hill_formula(c)];
  table.species.assign(census.begin(), census.end());
  std::stable_sort(table.species.begin(), table.species.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return table;
}

SpeciesTable analyze_snapshot(const BondSnapshot& snapshot, const SpeciesConfig& config) {
  const auto edges = threshold_bonds(snapshot, config);
  const auto labels = assign_molecule_ids(edges, snapshot.elements.size());
  return renumber_and_classify(labels, snapshot.elements);
}

void write_species_header(std::ostream& out) { out << "# step  num_molecules  species...\n"; }

void write_species_summary(std::ostream& out, const SpeciesTable& table, long step) {
  out << step << "  " << table.num_molecules;
  for (const auto& [formula, count] : table.species) out << "  " << formula << ' ' << count;
  out << '\n';
}

void write_snapshot(std::ostream& out, const BondSnapshot& snapshot) {
  out << "snapshot " << snapshot.step << '\n';
  out << "samples " << snapshot.samples << '\n';
  out << "window " << snapshot.nevery << ' ' << snapshot.nfreq << '\n';
  out << "atoms " << snapshot.elements.size() << '\n';
  for (const auto& el : snapshot.elements) out << el << '\n';
  out << "bonds " << snapshot.bonds.size() << '\n';
  for (const auto& b : snapshot.bonds) out << b.i + 1 << ' ' << b.j + 1 << ' ' << format_double(b.bo) << '\n';
}

namespace {

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next non-blank, non-comment line; false at end of input.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  }

  std::string where() const { return source_ + ":" + std::to_string(number_); }

  [[noreturn]] void fail(const std::string& what) const { throw InputError(where() + ": " + what); }

  std::vector<std::string> expect(const std::string& keyword, std::size_t values) {
    std::string line;
    if (!next(line)) fail("unexpected end of snapshot, expected '" + keyword + "'");
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(t);
    if (tokens.empty() || tokens[0] != keyword || tokens.size() != values + 1) {
      fail("malformed snapshot line, expected '" + keyword + "' with " + std::to_string(values) + " value(s)");
    }
    tokens.erase(tokens.begin());
    return tokens;
  }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t number_ = 0;
};

BondSnapshot read_body(LineReader& reader, long step) {
  BondSnapshot snap;
  snap.step = step;
  snap.samples = static_cast<int>(parse_long(reader.expect("samples", 1)[0], reader.where()));
  const auto window = reader.expect("window", 2);
  snap.nevery = static_cast<int>(parse_long(window[0], reader.where()));
  snap.nfreq = static_cast<int>(parse_long(window[1], reader.where()));
  const long atoms = parse_long(reader.expect("atoms", 1)[0], reader.where());
  if (atoms < 0) reader.fail("negative atom count");
  std::string line;
  for (long a = 0; a < atoms; ++a) {
    if (!reader.next(line)) reader.fail("unexpected end of snapshot in element list");
    std::istringstream ss(line);
    std::string el, extra;
    ss >> el;
    if (ss >> extra) reader.fail("malformed snapshot element line");
    snap.elements.push_back(el);
  }
  const long nb = parse_long(reader.expect("bonds", 1)[0], reader.where());
  if (nb < 0) reader.fail("negative bond count");
  for (long b = 0; b < nb; ++b) {
    if (!reader.next(line)) reader.fail("unexpected end of snapshot in bond list");
    std::istringstream ss(line);
    std::string ti, tj, tbo, extra;
    if (!(ss >> ti >> tj >> tbo) || (ss >> extra)) reader.fail("malformed snapshot bond line");
    const long i = parse_long(ti, reader.where());
    const long j = parse_long(tj, reader.where());
    if (i < 1 || j < 1 || i > atoms || j > atoms || i >= j) reader.fail("malformed snapshot bond line: bad atom ids");
    snap.bonds.push_back({static_cast<std::uint32_t>(i - 1), static_cast<std::uint32_t>(j - 1),
                          parse_double(tbo, reader.where())});
  }
  return snap;
}

}  // namespace

BondSnapshot read_snapshot(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  const long step = parse_long(reader.expect("snapshot", 1)[0], reader.where());
  return read_body(reader, step);
}

std::vector<BondSnapshot> read_snapshots(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  std::vector<BondSnapshot> out;
  std::string line;
  while (reader.next(line)) {
    std::istringstream ss(line);
    std::string keyword, value, extra;
    if (!(ss >> keyword >> value) || keyword != "snapshot" || (ss >> extra)) {
      reader.fail("malformed snapshot line, expected 'snapshot <step>'");
    }
    out.push_back(read_body(reader, parse_long(value, reader.where())));
  }
  return out;
}

void analyze_snapshot_files(std::span<const std::filesystem::path> files, const SpeciesConfig& config,
                            std::ostream& out) {
  config.validate();
  write_species_header(out);
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open snapshot file " + path.string());
    for (const auto& snap : read_snapshots(in, path.string())) {
      write_species_summary(out, analyze_snapshot(snap, config), snap.step);
    }
  }
}

}  // namespace reaxkit
