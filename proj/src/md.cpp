#include "reaxkit/md.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>

#include "reaxkit/error.hpp"
#include "reaxkit/io.hpp"

namespace reaxkit {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool parse_bool(const std::string& value, const std::string& context) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw InputError(context + ": expected a boolean, got '" + value + "'");
}

int parse_int(const std::string& value, const std::string& context) {
  const long v = parse_long(value, context);
  if (v < -2147483647L || v > 2147483647L) throw InputError(context + ": value out of range");
  return static_cast<int>(v);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open output file " + path.string());
  return out;
}

}  // namespace

void MdOptions::validate() const {
  if (steps < 0) throw InputError("steps must be non-negative");
  if (!(dt > 0.0)) throw InputError("dt must be positive");
  if (threads < 1) throw InputError("thread count must be at least 1");
  if (schedule.chunk < 1) throw InputError("schedule chunk must be at least 1");
  if (temperature < 0.0) throw InputError("temperature must be non-negative");
  if (energy_every < 1) throw InputError("energy.every must be at least 1");
  if (engine.reneighbor_every < 1) throw InputError("reneighbor_every must be at least 1");
  if (!(engine.qeq_tol > 0.0)) throw InputError("qeq.tol must be positive");
  if (engine.qeq_max_iter < 1) throw InputError("qeq.max_iter must be at least 1");
  if (species) species_config.validate();
}

void RunConfig::validate() const {
  md.validate();
  if (md.threads > max_threads) {
    throw InputError("thread count " + std::to_string(md.threads) + " exceeds the maximum of " +
                     std::to_string(max_threads));
  }
  for (int r : replicate) {
    if (r < 1) throw InputError("replicate factors must be positive");
  }
  if (system_path.empty()) throw InputError("no system file given");
  if (forcefield_path.empty()) throw InputError("no force-field file given");
  if (!std::filesystem::exists(system_path)) throw InputError("system file not found: " + system_path.string());
  if (!std::filesystem::exists(forcefield_path)) {
    throw InputError("force-field file not found: " + forcefield_path.string());
  }
}

void apply_run_setting(RunConfig& c, const std::string& key, const std::string& value) {
  const std::string ctx = "setting " + key;
  auto& md = c.md;
  if (key == "system") {
    c.system_path = value;
  } else if (key == "forcefield") {
    c.forcefield_path = value;
  } else if (key == "steps") {
    md.steps = parse_long(value, ctx);
  } else if (key == "dt") {
    md.dt = parse_double(value, ctx);
  } else if (key == "reneighbor_every") {
    md.engine.reneighbor_every = parse_int(value, ctx);
  } else if (key == "qeq.tol") {
    md.engine.qeq_tol = parse_double(value, ctx);
  } else if (key == "qeq.max_iter") {
    md.engine.qeq_max_iter = parse_int(value, ctx);
  } else if (key == "qeq.extrapolation") {
    if (value == "linear") {
      md.engine.extrapolation = ExtrapolationOrder::kLinear;
    } else if (value == "quadratic") {
      md.engine.extrapolation = ExtrapolationOrder::kQuadratic;
    } else {
      throw InputError(ctx + ": expected linear or quadratic");
    }
  } else if (key == "schedule.mode") {
    md.schedule.mode = parse_schedule_mode(value);
  } else if (key == "schedule.chunk") {
    const long chunk = parse_long(value, ctx);
    if (chunk < 1) throw InputError(ctx + ": chunk must be at least 1");
    md.schedule.chunk = static_cast<std::size_t>(chunk);
  } else if (key == "threads") {
    md.threads = parse_int(value, ctx);
  } else if (key == "max_threads") {
    c.max_threads = parse_int(value, ctx);
  } else if (key == "seed") {
    md.seed = static_cast<std::uint64_t>(parse_long(value, ctx));
  } else if (key == "temperature") {
    md.temperature = parse_double(value, ctx);
  } else if (key == "energy.every") {
    md.energy_every = parse_int(value, ctx);
  } else if (key == "replicate") {
    int r[3];
    if (std::sscanf(value.c_str(), "%d %d %d", &r[0], &r[1], &r[2]) != 3) {
      throw InputError(ctx + ": expected three integers");
    }
    for (int a = 0; a < 3; ++a) c.replicate[a] = r[a];
  } else if (key == "output.energy") {
    c.energy_csv = value;
  } else if (key == "output.perf") {
    c.perf_csv = value;
  } else if (key == "output.qeq") {
    c.qeq_csv = value;
  } else if (key == "output.species") {
    c.species_out = value;
  } else if (key == "output.snapshots") {
    c.snapshot_out = value;
  } else if (key == "output.system") {
    c.final_system = value;
  } else if (key == "species") {
    md.species = parse_bool(value, ctx);
  } else if (key == "species.nevery") {
    md.species_config.nevery = parse_int(value, ctx);
  } else if (key == "species.nfreq") {
    md.species_config.nfreq = parse_int(value, ctx);
  } else if (key == "species.threshold") {
    md.species_config.default_threshold = parse_double(value, ctx);
    if (md.species_config.default_threshold < 0.0) throw InputError(ctx + ": threshold is negative");
  } else if (key.rfind("species.threshold.", 0) == 0) {
    const std::string pair = key.substr(std::string("species.threshold.").size());
    const auto dash = pair.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == pair.size()) {
      throw InputError(ctx + ": expected species.threshold.<A>-<B>");
    }
    md.species_config.set_threshold(pair.substr(0, dash), pair.substr(dash + 1), parse_double(value, ctx));
  } else {
    throw InputError("unknown setting '" + key + "'");
  }
}

RunConfig parse_run_config(std::istream& in, const std::string& source) {
  RunConfig config;
  for (const auto& kv : parse_key_values(in, source)) {
    try {
      apply_run_setting(config, kv.key, kv.value);
    } catch (const InputError& e) {
      throw InputError(source + ":" + std::to_string(kv.line) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  return parse_run_config(in, path.string());
}

double kinetic_energy(const SystemState& state, const ForceField& ff) {
  double ke = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double m = ff.types[static_cast<std::size_t>(state.type[i])].mass;
    ke += m * dot(state.velocity[i], state.velocity[i]);
  }
  return 0.5 * ke * units::kMvvToKcal;
}

double instantaneous_temperature(const SystemState& state, const ForceField& ff) {
  const std::size_t n = state.size();
  if (n < 2) return 0.0;
  const double dof = 3.0 * static_cast<double>(n) - 3.0;
  return 2.0 * kinetic_energy(state, ff) / (dof * units::kBoltzmann);
}

Vec3 total_momentum(const SystemState& state, const ForceField& ff) {
  Vec3 p{};
  for (std::size_t i = 0; i < state.size(); ++i) {
    p += state.velocity[i] * ff.types[static_cast<std::size_t>(state.type[i])].mass;
  }
  return p;
}

void initialize_velocities(SystemState& state, const ForceField& ff, double temperature, std::uint64_t seed) {
  const std::size_t n = state.size();
  state.velocity.assign(n, Vec3{});
  if (n < 2 || temperature <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double total_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = ff.types[static_cast<std::size_t>(state.type[i])].mass;
    const double sigma = std::sqrt(units::kBoltzmann * temperature / (m * units::kMvvToKcal));
    state.velocity[i] = {sigma * normal(rng), sigma * normal(rng), sigma * normal(rng)};
    total_mass += m;
  }
  const Vec3 vcm = total_momentum(state, ff) * (1.0 / total_mass);
  for (auto& v : state.velocity) v -= vcm;
  const double current = instantaneous_temperature(state, ff);
  if (current > 0.0) {
    const double scale = std::sqrt(temperature / current);
    for (auto& v : state.velocity) v = v * scale;
  }
}

void write_energy_header(std::ostream& out) {
  out << "step,E_bond,E_over,E_angle,E_tor,E_hb,E_vdw,E_coul,E_pol,KE,total\n";
}

void write_energy_row(std::ostream& out, const StepRecord& rec) {
  char buf[512];
  const auto& e = rec.energy;
  std::snprintf(buf, sizeof buf, "%ld,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", rec.step,
                e[EnergyTerm::kBond], e[EnergyTerm::kOver], e[EnergyTerm::kAngle], e[EnergyTerm::kTorsion],
                e[EnergyTerm::kHBond], e[EnergyTerm::kVdw], e[EnergyTerm::kCoulomb], e[EnergyTerm::kPolarization],
                rec.kinetic, rec.total);
  out << buf;
}

void write_qeq_header(std::ostream& out) { out << "step,iterations_s,iterations_t,residual_s,residual_t\n"; }

void write_qeq_row(std::ostream& out, const StepRecord& rec) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%ld,%d,%d,%.6e,%.6e\n", rec.step, rec.iterations_s, rec.iterations_t,
                rec.residual_s, rec.residual_t);
  out << buf;
}

RunResult run_md(const MdOptions& options, const ForceField& ff, System& system, const RunSinks& sinks) {
  options.validate();
  auto& state = system.state;
  const auto& box = system.box;
  const std::size_t n = state.size();
  validate_box(box, ff.r_nonb);

  RunResult result;
  ThreadPool pool(options.threads);
  ExecContext ctx{&pool, options.schedule, &result.perf};
  ForceEngine engine(ff, options.engine, ctx);

  if (options.temperature > 0.0) initialize_velocities(state, ff, options.temperature, options.seed);
  state.velocity.resize(n);
  state.force.assign(n, Vec3{});

  std::vector<double> inv_mass(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv_mass[i] = 1.0 / (ff.types[static_cast<std::size_t>(state.type[i])].mass * units::kMvvToKcal);
  }

  std::vector<std::string> elements(n);
  for (std::size_t i = 0; i < n; ++i) elements[i] = ff.types[static_cast<std::size_t>(state.type[i])].symbol;
  BondAverager averager;

  if (sinks.energy != nullptr) write_energy_header(*sinks.energy);
  if (sinks.qeq != nullptr) write_qeq_header(*sinks.qeq);
  if (options.species && sinks.species != nullptr) write_species_header(*sinks.species);

  const auto start = Clock::now();
  const long first_step = state.step;

  auto evaluate = [&]() {
    EnergyBreakdown e;
    try {
      e = engine.compute(state, box);
    } catch (const ConvergenceError& err) {
      throw ConvergenceError("step " + std::to_string(state.step) + ": " + err.what(), err.residual_s(),
                             err.residual_t());
    }
    StepRecord rec;
    rec.step = state.step;
    rec.energy = e;
    const auto& q = engine.qeq_state();
    rec.iterations_s = q.iterations_s;
    rec.iterations_t = q.iterations_t;
    rec.residual_s = q.residual_s;
    rec.residual_t = q.residual_t;
    double sum_q = 0.0;
    for (double c : state.charge) sum_q += c;
    rec.net_charge_error = std::abs(sum_q - state.net_charge);

    if (options.species) {
      KernelTimer timer(&result.perf, "species");
      const auto& sc = options.species_config;
      if (sc.samples_at(state.step)) averager.accumulate(engine.bonds());
      if (sc.outputs_at(state.step)) {
        const auto snap = averager.snapshot(state.step, elements, sc.nevery, sc.nfreq);
        if (sinks.species != nullptr) write_species_summary(*sinks.species, analyze_snapshot(snap, sc), state.step);
        if (sinks.snapshots != nullptr) write_snapshot(*sinks.snapshots, snap);
        averager.reset();
      }
    }
    result.records.push_back(rec);
  };

  auto emit = [&]() {
    auto& rec = result.records.back();
    rec.kinetic = kinetic_energy(state, ff);
    rec.total = rec.energy.potential() + rec.kinetic;
    if (!std::isfinite(rec.total)) throw Error("non-finite energy at step " + std::to_string(rec.step));
    if (sinks.energy != nullptr && (rec.step - first_step) % options.energy_every == 0) {
      write_energy_row(*sinks.energy, rec);
    }
    if (sinks.qeq != nullptr && options.engine.solve_charges) write_qeq_row(*sinks.qeq, rec);
  };

  evaluate();
  emit();

  const double dt = options.dt;
  for (long s = 0; s < options.steps; ++s) {
    ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
      for (std::size_t i = b; i < e; ++i) {
        state.velocity[i] += state.force[i] * (0.5 * dt * inv_mass[i]);
        state.position[i] = wrap_position(state.position[i] + state.velocity[i] * dt, box);
      }
    });
    ++state.step;
    evaluate();
    ctx.for_each(n, [&](std::size_t b, std::size_t e, int) {
      for (std::size_t i = b; i < e; ++i) state.velocity[i] += state.force[i] * (0.5 * dt * inv_mass[i]);
    });
    emit();
  }

  result.wall_seconds = seconds_since(start);
  const double other = result.wall_seconds - result.perf.total();
  result.perf.record("other", other > 0.0 ? other : 0.0);
  return result;
}

RunResult run_from_config(const RunConfig& config) {
  config.validate();
  const ForceField ff = load_forcefield(config.forcefield_path);
  System system = load_system(config.system_path, ff);
  if (config.replicate[0] != 1 || config.replicate[1] != 1 || config.replicate[2] != 1) {
    system = replicate(system.state, system.box, config.replicate[0], config.replicate[1], config.replicate[2]);
  }

  auto energy = open_output(config.energy_csv);
  std::ofstream qeq, species, snapshots;
  RunSinks sinks;
  sinks.energy = &energy;
  if (!config.qeq_csv.empty()) {
    qeq = open_output(config.qeq_csv);
    sinks.qeq = &qeq;
  }
  if (config.md.species) {
    species = open_output(config.species_out.empty() ? std::filesystem::path("species.txt") : config.species_out);
    sinks.species = &species;
    if (!config.snapshot_out.empty()) {
      snapshots = open_output(config.snapshot_out);
      sinks.snapshots = &snapshots;
    }
  }

  RunResult result = run_md(config.md, ff, system, sinks);

  auto perf = open_output(config.perf_csv);
  perf << result.perf.csv();
  if (!config.final_system.empty()) save_system(config.final_system, system, ff);
  for (auto* s : {&energy, &qeq, &species, &snapshots, &perf}) {
    if (s->is_open()) {
      s->flush();
      if (!*s) throw Error("write failure on an output file");
    }
  }
  return result;
}

std::vector<BenchRow> run_bench(const BenchConfig& config, const ForceField& ff, const System& system) {
  if (config.threads.empty() || config.chunks.empty()) throw InputError("bench needs thread and chunk lists");
  if (config.steps < 1) throw InputError("bench needs at least one step");
  std::vector<BenchRow> rows;
  for (int t : config.threads) {
    if (t < 1) throw InputError("thread count must be at least 1");
    if (t > config.run.max_threads) {
      throw InputError("thread count " + std::to_string(t) + " exceeds the maximum of " +
                       std::to_string(config.run.max_threads));
    }
    for (std::size_t chunk : config.chunks) {
      MdOptions md = config.run.md;
      md.threads = t;
      md.schedule.chunk = chunk;
      md.steps = config.steps;
      md.species = false;
      System copy = system;
      const auto start = Clock::now();
      RunResult r = run_md(md, ff, copy);
      const double wall = seconds_since(start);
      BenchRow row;
      row.threads = t;
      row.chunk = chunk;
      row.steps_per_sec = static_cast<double>(config.steps + 1) / wall;
      row.perf = std::move(r.perf);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "threads,chunk,steps_per_sec";
  for (const auto& k : PerfCounters::kernel_names()) out << ',' << k;
  out << '\n';
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.6g", row.steps_per_sec);
    out << row.threads << ',' << row.chunk << ',' << buf;
    for (const auto& k : PerfCounters::kernel_names()) {
      std::snprintf(buf, sizeof buf, "%.6g", row.perf.seconds(k));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace reaxkit
