#pragma once

// NVE molecular dynamics driver and the thread/chunk benchmark.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "reaxkit/core.hpp"
#include "reaxkit/engine.hpp"
#include "reaxkit/parallel.hpp"
#include "reaxkit/species.hpp"

namespace reaxkit {

struct MdOptions {
  long steps = 0;
  double dt = 0.1;  // fs
  EngineOptions engine{};
  SchedulePolicy schedule{};
  int threads = 1;
  std::uint64_t seed = 12345;
  double temperature = 0.0;  // K; 0 keeps the velocities of the input
  bool species = false;
  SpeciesConfig species_config{};
  int energy_every = 1;

  void validate() const;
};

struct RunConfig {
  std::filesystem::path system_path;
  std::filesystem::path forcefield_path;
  MdOptions md{};
  std::filesystem::path energy_csv = "energy.csv";
  std::filesystem::path perf_csv = "perf.csv";
  std::filesystem::path qeq_csv;        // empty: not written
  std::filesystem::path species_out;    // empty: species.txt when species analysis is on
  std::filesystem::path snapshot_out;   // empty: not written
  std::filesystem::path final_system;   // empty: not written
  int replicate[3] = {1, 1, 1};
  int max_threads = 256;

  void validate() const;
};

/// Applies one `key = value` setting; throws InputError on unknown keys.
void apply_run_setting(RunConfig& config, const std::string& key, const std::string& value);
RunConfig parse_run_config(std::istream& in, const std::string& source = "<stream>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Maxwell-Boltzmann velocities at `temperature`, centre-of-mass momentum
/// removed and rescaled so the instantaneous temperature over 3N-3 degrees of
/// freedom equals the target.
void initialize_velocities(SystemState& state, const ForceField& ff, double temperature, std::uint64_t seed);

double kinetic_energy(const SystemState& state, const ForceField& ff);
double instantaneous_temperature(const SystemState& state, const ForceField& ff);
Vec3 total_momentum(const SystemState& state, const ForceField& ff);

struct StepRecord {
  long step = 0;
  EnergyBreakdown energy{};
  double kinetic = 0.0;
  double total = 0.0;
  int iterations_s = 0;
  int iterations_t = 0;
  double residual_s = 0.0;
  double residual_t = 0.0;
  double net_charge_error = 0.0;  // |Σq - Q_net|
};

struct RunSinks {
  std::ostream* energy = nullptr;
  std::ostream* qeq = nullptr;
  std::ostream* species = nullptr;
  std::ostream* snapshots = nullptr;
};

struct RunResult {
  std::vector<StepRecord> records;
  PerfCounters perf;
  double wall_seconds = 0.0;
};

void write_energy_header(std::ostream& out);
void write_energy_row(std::ostream& out, const StepRecord& rec);
void write_qeq_header(std::ostream& out);
void write_qeq_row(std::ostream& out, const StepRecord& rec);

/// Velocity-Verlet NVE run of `options.steps` steps.  Step 0 is a single
/// force evaluation; each later step kicks, drifts, evaluates and kicks.
/// The system is advanced in place.  Charge-solver failure and non-finite
/// energies abort with the step number.
RunResult run_md(const MdOptions& options, const ForceField& ff, System& system, const RunSinks& sinks = {});

/// cmd_run: loads inputs, runs, writes every output file of the config.
RunResult run_from_config(const RunConfig& config);

struct BenchConfig {
  RunConfig run{};
  std::vector<int> threads{1};
  std::vector<std::size_t> chunks{20};
  long steps = 10;
};

struct BenchRow {
  int threads = 1;
  std::size_t chunk = 20;
  double steps_per_sec = 0.0;
  PerfCounters perf;
};

std::vector<BenchRow> run_bench(const BenchConfig& config, const ForceField& ff, const System& system);
/// CSV `threads,chunk,steps_per_sec,<kernel seconds...>`.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace reaxkit
