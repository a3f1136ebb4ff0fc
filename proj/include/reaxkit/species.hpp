#pragma once

// Molecular species analysis.  Bond orders are sampled every `nevery` steps
// and averaged over a window of `nfreq` steps; pairs whose average exceeds
// the threshold for their element pair form a graph whose connected
// components are the molecules.  Molecules are counted by elemental formula.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "reaxkit/bonded.hpp"

namespace reaxkit {

struct SpeciesConfig {
  int nevery = 10;
  int nfreq = 1000;
  double default_threshold = 0.3;
  /// Keyed by the element symbols in lexicographic order.
  std::map<std::pair<std::string, std::string>, double> overrides;

  void set_threshold(const std::string& a, const std::string& b, double value);
  double threshold(const std::string& a, const std::string& b) const;
  void validate() const;

  bool samples_at(long step) const { return step > 0 && step % nevery == 0; }
  bool outputs_at(long step) const { return step > 0 && step % nfreq == 0; }
};

struct SnapshotBond {
  std::uint32_t i = 0;  // 0-based, i < j
  std::uint32_t j = 0;
  double bo = 0.0;      // averaged
};

/// Averaged bond orders of one window.
struct BondSnapshot {
  long step = 0;
  int samples = 0;
  int nevery = 0;
  int nfreq = 0;
  std::vector<std::string> elements;  // per atom
  std::vector<SnapshotBond> bonds;    // sorted by (i, j)
};

/// Running per-pair sums over the current window.
class BondAverager {
 public:
  void reset();
  /// Adds the corrected BO of every bond (i < j) of the list.
  void accumulate(const BondList& bonds);
  /// Adds explicit (i, j, bo) samples; used by tests.
  void accumulate(std::span<const SnapshotBond> sample);
  int samples() const { return samples_; }
  /// Averages over the samples taken so far.  Pairs absent from a sample
  /// count as zero for that sample.
  BondSnapshot snapshot(long step, std::vector<std::string> elements, int nevery, int nfreq) const;

 private:
  void add(std::uint32_t i, std::uint32_t j, double bo);

  std::unordered_map<std::uint64_t, double> sums_;
  int samples_ = 0;
};

struct Edge {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
};

/// Edges whose averaged BO is strictly larger than the element-pair threshold.
std::vector<Edge> threshold_bonds(const BondSnapshot& snapshot, const SpeciesConfig& config);

/// Molecule label per atom: the minimum global ID (1-based) of its connected
/// component, found by relaxing edges until nothing changes.
std::vector<std::uint32_t> assign_molecule_ids(std::span<const Edge> edges, std::size_t num_atoms);

struct SpeciesTable {
  std::vector<std::uint32_t> molecule;  // per atom, 1..M
  std::size_t num_molecules = 0;
  /// formula -> count, ordered by descending count then formula.
  std::vector<std::pair<std::string, std::size_t>> species;
};

/// Dense renumbering of the labels (ascending) and the formula census.
SpeciesTable renumber_and_classify(std::span<const std::uint32_t> labels, std::span<const std::string> elements);

/// Hill-order formula from element counts; a count of 1 is omitted.
std::string hill_formula(const std::map<std::string, std::size_t>& counts);

SpeciesTable analyze_snapshot(const BondSnapshot& snapshot, const SpeciesConfig& config);

void write_species_header(std::ostream& out);
/// `step  M  formula count  formula count ...`
void write_species_summary(std::ostream& out, const SpeciesTable& table, long step);

void write_snapshot(std::ostream& out, const BondSnapshot& snapshot);
BondSnapshot read_snapshot(std::istream& in, const std::string& source = "<stream>");
/// Reads every snapshot in a stream (snapshots may be concatenated).
std::vector<BondSnapshot> read_snapshots(std::istream& in, const std::string& source = "<stream>");

/// Offline analysis: summaries of every snapshot of every file, in order.
void analyze_snapshot_files(std::span<const std::filesystem::path> files, const SpeciesConfig& config,
                            std::ostream& out);

}  // namespace reaxkit
