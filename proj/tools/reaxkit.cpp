// reaxkit command-line driver: run, species, ghostmodel, bench.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "reaxkit/error.hpp"
#include "reaxkit/ghost_model.hpp"
#include "reaxkit/io.hpp"
#include "reaxkit/md.hpp"
#include "reaxkit/species.hpp"

namespace {

using namespace reaxkit;

struct RunFlags {
  std::string config;
  std::vector<std::string> settings;
  std::optional<std::string> system, forcefield, schedule, energy, perf, qeq, species_out, snapshots, final_system;
  std::optional<long> steps;
  std::optional<double> dt, temperature;
  std::optional<int> threads;
  std::optional<std::size_t> chunk;
  std::optional<std::uint64_t> seed;
  bool species = false;

  void add_common(CLI::App* app) {
    app->add_option("-c,--config", config, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--set", settings, "extra key=value setting (repeatable)");
    app->add_option("--system", system, "system file");
    app->add_option("--forcefield", forcefield, "force-field file");
    app->add_option("--schedule", schedule, "loop schedule")->check(CLI::IsMember({"static", "dynamic"}));
    app->add_option("--chunk", chunk, "atoms per scheduling chunk")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "velocity seed");
    app->add_option("--steps", steps, "MD steps")->check(CLI::NonNegativeNumber);
    app->add_option("--dt", dt, "time step in fs")->check(CLI::PositiveNumber);
    app->add_option("--temperature", temperature, "initial temperature in K")->check(CLI::NonNegativeNumber);
  }

  RunConfig build() const {
    RunConfig c;
    if (!config.empty()) c = load_run_config(config);
    for (const auto& kv : settings) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      apply_run_setting(c, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (system) c.system_path = *system;
    if (forcefield) c.forcefield_path = *forcefield;
    if (schedule) c.md.schedule.mode = parse_schedule_mode(*schedule);
    if (chunk) c.md.schedule.chunk = *chunk;
    if (seed) c.md.seed = *seed;
    if (steps) c.md.steps = *steps;
    if (dt) c.md.dt = *dt;
    if (temperature) c.md.temperature = *temperature;
    if (threads) c.md.threads = *threads;
    if (energy) c.energy_csv = *energy;
    if (perf) c.perf_csv = *perf;
    if (qeq) c.qeq_csv = *qeq;
    if (species_out) c.species_out = *species_out;
    if (snapshots) c.snapshot_out = *snapshots;
    if (final_system) c.final_system = *final_system;
    if (species) c.md.species = true;
    return c;
  }
};

int cmd_run(const RunFlags& flags) {
  const RunConfig config = flags.build();
  const RunResult result = run_from_config(config);
  const auto& last = result.records.back();
  const auto& first = result.records.front();
  std::cout << "steps " << (last.step - first.step) << "  E_total " << last.total << "  drift "
            << (first.total != 0.0 ? (last.total - first.total) / std::abs(first.total) : 0.0) << "  wall "
            << result.wall_seconds << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reaxkit: multithreaded reactive molecular dynamics mini-engine"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "velocity-Verlet NVE run");
  run_flags.add_common(run);
  run->add_option("--threads", run_flags.threads, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--energy", run_flags.energy, "energy CSV path");
  run->add_option("--perf", run_flags.perf, "perf-counter CSV path");
  run->add_option("--qeq", run_flags.qeq, "charge-solver diagnostics CSV path");
  run->add_option("--species-out", run_flags.species_out, "species summary path");
  run->add_option("--snapshots", run_flags.snapshots, "averaged bond-order snapshot path");
  run->add_option("--final-system", run_flags.final_system, "write the final system here");
  run->add_flag("--species", run_flags.species, "enable in-situ species analysis");

  std::vector<std::string> snapshot_files;
  double threshold = 0.3;
  std::vector<std::string> pair_thresholds;
  std::string species_output;
  auto* species = app.add_subcommand("species", "species summaries from bond-order snapshot files");
  species->add_option("snapshots", snapshot_files, "snapshot files")->required()->check(CLI::ExistingFile);
  species->add_option("--threshold", threshold, "default bond-order threshold")->check(CLI::NonNegativeNumber);
  species->add_option("--pair-threshold", pair_thresholds, "per element pair threshold, e.g. H-O=0.4");
  species->add_option("-o,--output", species_output, "output file (default stdout)");

  std::vector<double> dg_list, t_list;
  auto* ghost = app.add_subcommand("ghostmodel", "ghost-to-domain volume ratios, CSV on stdout");
  ghost->add_option("--dg", dg_list, "d/g values")->required()->delimiter(',')->check(CLI::PositiveNumber);
  ghost->add_option("--t", t_list, "threads-per-node values")->required()->delimiter(',');

  RunFlags bench_flags;
  std::vector<int> bench_threads{1};
  std::vector<std::size_t> bench_chunks{20};
  std::vector<int> bench_replicate;
  std::string bench_output;
  int bench_max_threads = 0;
  auto* bench = app.add_subcommand("bench", "steps/second and kernel times over threads x chunks");
  bench_flags.add_common(bench);
  bench->add_option("--threads", bench_threads, "thread counts")->delimiter(',')->check(CLI::PositiveNumber);
  bench->add_option("--chunks", bench_chunks, "chunk sizes")->delimiter(',')->check(CLI::PositiveNumber);
  bench->add_option("--replicate", bench_replicate, "replication nx ny nz")->expected(3);
  bench->add_option("--max-threads", bench_max_threads, "largest permitted thread count");
  bench->add_option("-o,--output", bench_output, "CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_flags);

    if (*species) {
      SpeciesConfig config;
      config.default_threshold = threshold;
      for (const auto& p : pair_thresholds) {
        const auto eq = p.find('=');
        const auto dash = p.find('-');
        if (eq == std::string::npos || dash == std::string::npos || dash > eq) {
          throw InputError("--pair-threshold expects A-B=value, got '" + p + "'");
        }
        config.set_threshold(p.substr(0, dash), p.substr(dash + 1, eq - dash - 1),
                             parse_double(p.substr(eq + 1), "--pair-threshold"));
      }
      std::vector<std::filesystem::path> files(snapshot_files.begin(), snapshot_files.end());
      if (species_output.empty()) {
        analyze_snapshot_files(files, config, std::cout);
      } else {
        std::ofstream out(species_output);
        if (!out) throw InputError("cannot open output file " + species_output);
        analyze_snapshot_files(files, config, out);
      }
      return 0;
    }

    if (*ghost) {
      const auto rows = ratio_table(dg_list, t_list);
      write_ratio_csv(std::cout, rows);
      return 0;
    }

    if (*bench) {
      BenchConfig config;
      config.run = bench_flags.build();
      if (bench_max_threads > 0) config.run.max_threads = bench_max_threads;
      if (!bench_replicate.empty()) {
        for (int a = 0; a < 3; ++a) config.run.replicate[a] = bench_replicate[static_cast<std::size_t>(a)];
      }
      config.threads = bench_threads;
      config.chunks = bench_chunks;
      config.steps = bench_flags.steps ? *bench_flags.steps : 10;
      config.run.md.steps = config.steps;
      config.run.validate();
      const ForceField ff = load_forcefield(config.run.forcefield_path);
      System system = load_system(config.run.system_path, ff);
      const auto& r = config.run.replicate;
      if (r[0] != 1 || r[1] != 1 || r[2] != 1) system = replicate(system.state, system.box, r[0], r[1], r[2]);
      std::cerr << "bench: " << system.state.size() << " atoms, " << config.steps << " steps per cell\n";
      const auto rows = run_bench(config, ff, system);
      if (bench_output.empty()) {
        write_bench_csv(std::cout, rows);
      } else {
        std::ofstream out(bench_output);
        if (!out) throw InputError("cannot open output file " + bench_output);
        write_bench_csv(out, rows);
      }
      return 0;
    }
  } catch (const InputError& e) {
    std::cerr << "reaxkit: input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "reaxkit: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
