#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "reaxkit/error.hpp"
#include "reaxkit/io.hpp"
#include "reaxkit/md.hpp"
#include "support.hpp"

using namespace reaxkit;

namespace {

System hydroxyl(double r) {
  const auto& ff = rkt::water_ff();
  System s;
  s.box.lengths = {40, 40, 40};
  s.box.periodic = {false, false, false};
  s.state.resize(2);
  s.state.type = {ff.find_type("O"), ff.find_type("H")};
  s.state.position = {{20, 20, 20}, {20 + r, 20, 20}};
  return s;
}

double relative_drift(const RunResult& r) {
  const double e0 = r.records.front().total;
  double worst = 0.0;
  for (const auto& rec : r.records) worst = std::max(worst, std::abs((rec.total - e0) / e0));
  return worst;
}

std::string energy_csv(MdOptions opt, System s) {
  std::ostringstream out;
  RunSinks sinks;
  sinks.energy = &out;
  run_md(opt, rkt::water_ff(), s, sinks);
  return out.str();
}

}  // namespace

TEST_CASE("zero steps is one evaluation") {
  System s = rkt::load_water216();
  const auto before = s.state.position;
  MdOptions opt;
  opt.steps = 0;
  std::ostringstream energy;
  RunSinks sinks;
  sinks.energy = &energy;
  const auto r = run_md(opt, rkt::water_ff(), s, sinks);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].step == 0);
  CHECK(s.state.position == before);
  CHECK(std::isfinite(r.records[0].total));
  CHECK(r.records[0].energy[EnergyTerm::kBond] < 0.0);
  std::istringstream lines(energy.str());
  std::string header, row, extra;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == "step,E_bond,E_over,E_angle,E_tor,E_hb,E_vdw,E_coul,E_pol,KE,total");
  CHECK(row.rfind("0,", 0) == 0);
  CHECK_FALSE(std::getline(lines, extra));
}

TEST_CASE("bonded dimer conserves energy") {
  System s = hydroxyl(1.02);
  MdOptions opt;
  opt.steps = 1000;
  opt.dt = 0.1;
  opt.engine.qeq_tol = 1e-10;
  const auto r = run_md(opt, rkt::water_ff(), s, {});
  REQUIRE(r.records.size() == 1001);
  CHECK(relative_drift(r) < 1e-5);
  // the bond actually vibrates
  CHECK(std::abs(r.records[500].kinetic) > 1e-3);
  for (const auto& rec : r.records) CHECK(rec.net_charge_error <= 1e-10 * 2);
}

TEST_CASE("identical configurations give identical energy files") {
  MdOptions opt;
  opt.steps = 20;
  opt.threads = 2;
  opt.schedule = {ScheduleMode::kStatic, 20};
  opt.temperature = 300.0;
  opt.seed = 9;
  const System s = rkt::load_water216();
  const auto a = energy_csv(opt, s);
  const auto b = energy_csv(opt, s);
  CHECK(a == b);
  opt.seed = 10;
  CHECK(energy_csv(opt, s) != a);
}

TEST_CASE("initial velocities") {
  const auto& ff = rkt::water_ff();
  System s = rkt::load_water216();
  initialize_velocities(s.state, ff, 300.0, 42);
  CHECK(instantaneous_temperature(s.state, ff) == doctest::Approx(300.0).epsilon(1e-12));
  const Vec3 p = total_momentum(s.state, ff);
  CHECK(norm(p) < 1e-10);
  System t = rkt::load_water216();
  initialize_velocities(t.state, ff, 300.0, 42);
  CHECK(t.state.velocity == s.state.velocity);
}

TEST_CASE("run configuration") {
  std::istringstream in(
      "# run\n"
      "system = a.xyz\nforcefield = b.ff\nsteps = 50\ndt = 0.2\nreneighbor_every = 5\n"
      "qeq.tol = 1e-8\nschedule.mode = static\nschedule.chunk = 25\nthreads = 3\nseed = 7\n"
      "temperature = 250\nspecies = on\nspecies.nevery = 5\nspecies.nfreq = 50\n"
      "species.threshold = 0.35\nspecies.threshold.O-H = 0.4\noutput.energy = e.csv\nreplicate = 2 1 3\n");
  const auto c = parse_run_config(in);
  CHECK(c.system_path == "a.xyz");
  CHECK(c.forcefield_path == "b.ff");
  CHECK(c.md.steps == 50);
  CHECK(c.md.dt == 0.2);
  CHECK(c.md.engine.reneighbor_every == 5);
  CHECK(c.md.engine.qeq_tol == 1e-8);
  CHECK(c.md.schedule.mode == ScheduleMode::kStatic);
  CHECK(c.md.schedule.chunk == 25);
  CHECK(c.md.threads == 3);
  CHECK(c.md.seed == 7);
  CHECK(c.md.temperature == 250.0);
  CHECK(c.md.species);
  CHECK(c.md.species_config.nevery == 5);
  CHECK(c.md.species_config.threshold("H", "O") == 0.4);
  CHECK(c.md.species_config.threshold("C", "O") == 0.35);
  CHECK(c.energy_csv == "e.csv");
  CHECK(c.replicate[2] == 3);

  RunConfig d;
  CHECK_THROWS_AS(apply_run_setting(d, "colour", "red"), InputError);
  CHECK_THROWS_AS(apply_run_setting(d, "steps", "ten"), InputError);
  CHECK_THROWS_AS(apply_run_setting(d, "schedule.mode", "guided"), InputError);
  d.md.steps = -1;
  CHECK_THROWS_AS(d.md.validate(), InputError);
  d.md.steps = 1;
  d.md.dt = 0.0;
  CHECK_THROWS_AS(d.md.validate(), InputError);

  RunConfig missing;
  missing.system_path = "/nonexistent/system.xyz";
  missing.forcefield_path = rkt::data_path("water.ff");
  CHECK_THROWS_AS(missing.validate(), InputError);
  RunConfig greedy;
  greedy.system_path = rkt::data_path("water216.xyz");
  greedy.forcefield_path = rkt::data_path("water.ff");
  greedy.md.threads = 8;
  greedy.max_threads = 4;
  CHECK_THROWS_AS(greedy.validate(), InputError);
}

TEST_CASE("charge-solver failure names the step") {
  System s = rkt::load_water216();
  MdOptions opt;
  opt.steps = 2;
  opt.engine.qeq_max_iter = 1;
  opt.engine.qeq_tol = 1e-14;
  CHECK_THROWS_WITH_AS(run_md(opt, rkt::water_ff(), s, {}), doctest::Contains("step 0"), ConvergenceError);
}

TEST_CASE("in-situ and offline species summaries agree") {
  std::string reference;
  for (int threads : {1, 2, 4}) {
    System s = rkt::load_water216();
    MdOptions opt;
    opt.steps = 40;
    opt.threads = threads;
    opt.temperature = 600.0;
    opt.species = true;
    opt.species_config.nevery = 2;
    opt.species_config.nfreq = 20;
    std::ostringstream species, snaps;
    RunSinks sinks;
    sinks.species = &species;
    sinks.snapshots = &snaps;
    const auto r = run_md(opt, rkt::water_ff(), s, sinks);
    CHECK(r.perf.seconds("species") > 0.0);

    const auto path = std::filesystem::temp_directory_path() / ("reaxkit_snap_" + std::to_string(threads) + ".txt");
    {
      std::ofstream f(path);
      f << snaps.str();
    }
    std::ostringstream offline;
    const std::vector<std::filesystem::path> files{path};
    analyze_snapshot_files(files, opt.species_config, offline);
    std::filesystem::remove(path);

    CHECK(offline.str() == species.str());
    std::istringstream lines(species.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) ++count;
    CHECK(count == 3);
    CHECK(species.str().find("20  72  H2O 72\n") != std::string::npos);
    if (reference.empty()) reference = species.str();
    CHECK(species.str() == reference);
  }
}

TEST_CASE("benchmark rows") {
  BenchConfig bc;
  bc.threads = {1, 2};
  bc.chunks = {10, 20, 25, 50};
  bc.steps = 2;
  bc.run.md.steps = 2;
  const auto rows = run_bench(bc, rkt::water_ff(), rkt::load_water216());
  CHECK(rows.size() == 8);
  for (const auto& r : rows) CHECK(r.steps_per_sec > 0.0);
  std::ostringstream out;
  write_bench_csv(out, rows);
  CHECK(out.str().rfind("threads,chunk,steps_per_sec,write-lists,", 0) == 0);
  bc.threads = {512};
  CHECK_THROWS_AS(run_bench(bc, rkt::water_ff(), rkt::load_water216()), InputError);
}
