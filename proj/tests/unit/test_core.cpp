#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "reaxkit/core.hpp"
#include "reaxkit/error.hpp"
#include "reaxkit/io.hpp"
#include "support.hpp"

using namespace reaxkit;

namespace {

SimBox cube(double l) {
  SimBox b;
  b.lengths = {l, l, l};
  return b;
}

const char* kMinimalFF = R"(
atom.A.mass = 1
atom.A.valence = 1
atom.A.chi = 1
atom.A.eta = 10
atom.A.gamma = 1
atom.A.vdw_D = 0
atom.A.vdw_alpha = 1
atom.A.vdw_r = 1
atom.B.mass = 2
atom.B.valence = 2
atom.B.chi = 2
atom.B.eta = 12
atom.B.gamma = 1
atom.B.vdw_D = 0
atom.B.vdw_alpha = 1
atom.B.vdw_r = 1
pair.A-B.r0 = 1.2
pair.A-B.p_bo1 = -0.2
pair.A-B.p_bo2 = 5
pair.A-B.De = 50
)";

}  // namespace

TEST_CASE("min_image wraps into the half-open interval") {
  const SimBox box = cube(10.0);
  CHECK(min_image({0, 0, 0}, box).x == 0.0);
  CHECK(min_image({9, 0, 0}, box).x == doctest::Approx(-1.0));
  CHECK(min_image({-5, 0, 0}, box).x == doctest::Approx(-5.0));
  CHECK(min_image({5, 0, 0}, box).x == doctest::Approx(-5.0));
  CHECK(min_image({4.999, 0, 0}, box).x == doctest::Approx(4.999));
  CHECK(min_image({-25.5, 0, 0}, box).x == doctest::Approx(4.5));

  SimBox open = box;
  open.periodic = {false, true, true};
  CHECK(min_image({9, 9, 0}, open).x == 9.0);
  CHECK(min_image({9, 9, 0}, open).y == doctest::Approx(-1.0));
}

TEST_CASE("min_image is idempotent") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  SimBox box;
  box.lengths = {10.0, 13.0, 21.0};
  for (int t = 0; t < 10000; ++t) {
    const Vec3 d{u(rng), u(rng), u(rng)};
    const Vec3 a = min_image(d, box);
    const Vec3 b = min_image(a, box);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.z == b.z);
    for (int k = 0; k < 3; ++k) {
      CHECK(a[k] >= -0.5 * box.lengths[k]);
      CHECK(a[k] < 0.5 * box.lengths[k]);
    }
  }
}

TEST_CASE("taper boundary values") {
  const Taper t(10.0);
  CHECK(t.value(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(t.value(10.0)) < 1e-14);
  CHECK(t.value(5.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(t.value(12.0) == 0.0);
  CHECK(t.derivative(12.0) == 0.0);
  // vanishing first derivative at both ends, second and third by finite differences
  CHECK(std::abs(t.derivative(0.0)) < 1e-14);
  CHECK(std::abs(t.derivative(10.0)) < 1e-12);
  const double h = 1e-3;
  auto d2 = [&](double r) { return (t.derivative(r + h) - t.derivative(r - h)) / (2 * h); };
  CHECK(std::abs(d2(10.0 - 2 * h)) < 1e-6);
  CHECK(std::abs(d2(2 * h)) < 1e-6);
  // derivative matches the value by central differences
  for (double r = 0.3; r < 10.0; r += 0.7) {
    const double fd = (t.value(r + 1e-6) - t.value(r - 1e-6)) / 2e-6;
    CHECK(t.derivative(r) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("force-field parsing") {
  SUBCASE("minimal two-type file gives a symmetric pair table") {
    std::istringstream in(kMinimalFF);
    const ForceField ff = parse_forcefield(in);
    REQUIRE(ff.num_types() == 2);
    const auto& ab = ff.pair(0, 1);
    const auto& ba = ff.pair(1, 0);
    CHECK(ab.bonding);
    CHECK(ba.bonding);
    CHECK(ab.r0 == ba.r0);
    CHECK(ab.p_bo1 == ba.p_bo1);
    CHECK(ab.bond_depth == 50.0);
    CHECK_FALSE(ff.pair(0, 0).bonding);
    CHECK(ff.types[0].chi == doctest::Approx(23.0609));
    CHECK(ff.types[1].eta == doctest::Approx(12 * 23.0609));
    CHECK(ff.taper.cutoff() == 10.0);
  }
  SUBCASE("missing eta names the type") {
    std::string text = kMinimalFF;
    text.replace(text.find("atom.B.eta = 12"), 15, "");
    std::istringstream in(text);
    try {
      parse_forcefield(in);
      FAIL("expected an error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("atom type B") != std::string::npos);
      CHECK(std::string(e.what()).find("eta") != std::string::npos);
    }
  }
  SUBCASE("bond cutoff larger than nonbonded cutoff") {
    std::istringstream in(std::string(kMinimalFF) + "global.r_bond = 11\n");
    CHECK_THROWS_WITH_AS(parse_forcefield(in), doctest::Contains("bond cutoff exceeds nonbonded cutoff"),
                         InputError);
  }
  SUBCASE("conflicting mirrored pair entries") {
    std::istringstream in(std::string(kMinimalFF) +
                          "pair.B-A.r0 = 1.3\npair.B-A.p_bo1 = -0.2\npair.B-A.p_bo2 = 5\npair.B-A.De = 50\n");
    CHECK_THROWS_AS(parse_forcefield(in), InputError);
  }
  SUBCASE("identical mirrored pair entries are accepted") {
    std::istringstream in(std::string(kMinimalFF) +
                          "pair.B-A.r0 = 1.2\npair.B-A.p_bo1 = -0.2\npair.B-A.p_bo2 = 5\npair.B-A.De = 50\n");
    CHECK_NOTHROW(parse_forcefield(in));
  }
  SUBCASE("unknown key") {
    std::istringstream in(std::string(kMinimalFF) + "atom.A.colour = 3\n");
    CHECK_THROWS_AS(parse_forcefield(in), InputError);
  }
}

TEST_CASE("system parsing") {
  const ForceField& ff = rkt::water_ff();
  SUBCASE("three-atom water") {
    std::istringstream in("3\nbox 20 20 20\nO 0 0 0\nH 0.97 0 0\nH -0.24 0.94 0\n");
    const System s = parse_system(in, ff);
    REQUIRE(s.state.size() == 3);
    CHECK(ff.types[static_cast<std::size_t>(s.state.type[0])].symbol == "O");
    CHECK(ff.types[static_cast<std::size_t>(s.state.type[1])].symbol == "H");
    CHECK(ff.types[static_cast<std::size_t>(s.state.type[2])].symbol == "H");
    CHECK(s.state.velocity[2].x == 0.0);
  }
  SUBCASE("box header") {
    std::istringstream in("1\nbox 66.4 75.9 69.9\nO 1 2 3\n");
    const System s = parse_system(in, ff);
    CHECK(s.box.lengths.x == 66.4);
    CHECK(s.box.lengths.y == 75.9);
    CHECK(s.box.lengths.z == 69.9);
    CHECK(s.box.periodic[0]);
  }
  SUBCASE("charges, velocities and periodicity flags") {
    std::istringstream in("1\nbox 30 30 30 pbc 1 0 1\nO 1 2 3 -0.5 0.01 0.02 0.03\n");
    const System s = parse_system(in, ff);
    CHECK(s.state.charge[0] == -0.5);
    CHECK(s.state.velocity[0].z == 0.03);
    CHECK_FALSE(s.box.periodic[1]);
  }
  SUBCASE("errors") {
    std::istringstream empty("0\nbox 20 20 20\n");
    CHECK_THROWS_WITH_AS(parse_system(empty, ff), doctest::Contains("no atoms"), InputError);
    std::istringstream nobox("1\nO 0 0 0\n");
    CHECK_THROWS_WITH_AS(parse_system(nobox, ff), doctest::Contains("box"), InputError);
    std::istringstream unknown("1\nbox 20 20 20\nXe 0 0 0\n");
    CHECK_THROWS_AS(parse_system(unknown, ff), InputError);
    std::istringstream bad("2\nbox 20 20 20\nO 0 0 0\nH 1 2\n");
    CHECK_THROWS_WITH_AS(parse_system(bad, ff), doctest::Contains(":4"), InputError);
  }
}

TEST_CASE("write_system round trip") {
  const ForceField& ff = rkt::chon_ff();
  std::mt19937_64 rng(3);
  rkt::RandomSystemSpec spec;
  spec.atoms = 50;
  System s = rkt::random_system(ff, spec, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& q : s.state.charge) q = u(rng);
  for (auto& v : s.state.velocity) v = {u(rng), u(rng), u(rng)};
  std::stringstream buf;
  write_system(buf, s, ff);
  const System back = parse_system(buf, ff);
  REQUIRE(back.state.size() == s.state.size());
  for (std::size_t i = 0; i < s.state.size(); ++i) {
    CHECK(std::abs(back.state.position[i].x - s.state.position[i].x) <= 1e-12);
    CHECK(std::abs(back.state.position[i].y - s.state.position[i].y) <= 1e-12);
    CHECK(std::abs(back.state.position[i].z - s.state.position[i].z) <= 1e-12);
    CHECK(back.state.type[i] == s.state.type[i]);
    CHECK(back.state.charge[i] == s.state.charge[i]);
  }
}

TEST_CASE("replicate") {
  System s;
  s.box = cube(20.0);
  s.state.resize(2);
  s.state.type = {0, 1};
  s.state.position = {{1, 1, 1}, {2, 2, 2}};

  const System same = replicate(s.state, s.box, 1, 1, 1);
  CHECK(same.state.size() == 2);
  CHECK(same.state.position[1].x == 2.0);

  const System big = replicate(s.state, s.box, 2, 2, 2);
  CHECK(big.state.size() == 16);
  CHECK(big.box.lengths.x == 40.0);
  CHECK(big.box.lengths.z == 40.0);
  std::size_t type0 = 0;
  for (int t : big.state.type) type0 += t == 0 ? 1 : 0;
  CHECK(type0 == 8);
  CHECK(big.state.position[2].x == doctest::Approx(21.0));

  CHECK_THROWS_AS(replicate(s.state, s.box, 10, 10, 10, 1000), InputError);
  SimBox open = s.box;
  open.periodic = {false, true, true};
  CHECK_THROWS_AS(replicate(s.state, open, 2, 1, 1), InputError);

  System cell;
  cell.box = cube(30.0);
  cell.state.resize(32480);
  CHECK(replicate(cell.state, cell.box, 1, 1, 1).state.size() == 32480);
  CHECK(replicate(cell.state, cell.box, 2, 2, 2).state.size() == 259840);
}

TEST_CASE("bond order formula") {
  PairParams p;
  p.bonding = true;
  p.r0 = 1.0;
  p.p_bo1 = -0.1;
  p.p_bo2 = 6.0;
  const double shift = std::exp(-0.1 * std::pow(5.0, 6.0));
  CHECK(raw_bond_order(p, 1.0, 5.0) == doctest::Approx(std::exp(-0.1) - shift).epsilon(1e-15));
  CHECK(raw_bond_order(p, 5.0, 5.0) == 0.0);
  CHECK(raw_bond_order(p, 6.0, 5.0) == 0.0);
  for (double r = 0.5; r < 3.0; r += 0.25) {
    const double fd = (raw_bond_order(p, r + 1e-6, 5.0) - raw_bond_order(p, r - 1e-6, 5.0)) / 2e-6;
    CHECK(raw_bond_order_derivative(p, r, 5.0) == doctest::Approx(fd).epsilon(1e-6));
  }
}
