#include <doctest.h>

#include <cmath>
#include <random>

#include "reaxkit/bonded.hpp"
#include "reaxkit/engine.hpp"
#include "support.hpp"

using namespace reaxkit;

namespace {

double energy(const ForceField& ff, const System& s, const ExecContext& ctx, TermMask mask = TermMask::all()) {
  return rkt::evaluate_frozen(ff, s, ctx, mask).energy.potential();
}

/// Largest |F - F_fd| / (1e-6 max(1,|F|)) over all components.
double fd_worst(const ForceField& ff, const System& s, const ExecContext& ctx, TermMask mask) {
  const auto ref = rkt::evaluate_frozen(ff, s, ctx, mask);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < s.state.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      System p = s, m = s;
      p.state.position[i][a] += h;
      m.state.position[i][a] -= h;
      const double fd = -(energy(ff, p, ctx, mask) - energy(ff, m, ctx, mask)) / (2 * h);
      const double f = ref.force[i][a];
      worst = std::max(worst, std::abs(f - fd) / (1e-6 * std::max(1.0, std::abs(f))));
    }
  }
  return worst;
}

System cluster(std::size_t atoms, std::uint64_t seed, bool periodic = true) {
  std::mt19937_64 rng(seed);
  rkt::RandomSystemSpec spec;
  spec.atoms = atoms;
  spec.region = std::cbrt(static_cast<double>(atoms) * 4.0);
  spec.periodic = periodic;
  spec.min_dist = 0.95;
  System s = rkt::random_system(rkt::chon_ff(), spec, rng);
  std::uniform_real_distribution<double> q(-0.4, 0.4);
  s.state.charge.resize(s.state.size());
  for (auto& c : s.state.charge) c = q(rng);
  return s;
}

System molecule(const ForceField& ff, const std::vector<std::pair<std::string, Vec3>>& atoms) {
  System s;
  s.box.lengths = {30, 30, 30};
  s.state.resize(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    s.state.type[i] = ff.find_type(atoms[i].first);
    s.state.position[i] = atoms[i].second + Vec3{10, 10, 10};
  }
  return s;
}

Vec3 net_force(const std::vector<Vec3>& f) {
  Vec3 sum{};
  for (const auto& v : f) sum += v;
  return sum;
}

}  // namespace

TEST_CASE("analytic forces match finite differences term by term") {
  rkt::Exec ex(2);
  const auto& ff = rkt::chon_ff();
  const EnergyTerm terms[] = {EnergyTerm::kBond, EnergyTerm::kOver,    EnergyTerm::kAngle, EnergyTerm::kTorsion,
                              EnergyTerm::kHBond, EnergyTerm::kVdw, EnergyTerm::kCoulomb};
  for (int trial = 0; trial < 4; ++trial) {
    const System s = cluster(12 + 6 * static_cast<std::size_t>(trial), 40 + static_cast<std::uint64_t>(trial));
    for (auto term : terms) {
      CAPTURE(static_cast<int>(term));
      CAPTURE(trial);
      CHECK(fd_worst(ff, s, ex.ctx, TermMask::only(term)) <= 1.0);
    }
  }
}

TEST_CASE("bond energy of an isolated pair") {
  ForceField ff = rkt::chon_ff();
  ff.lambda = 0.0;
  rkt::Exec ex(1);
  const auto& p = ff.pair(ff.find_type("C"), ff.find_type("C"));
  const System s = molecule(ff, {{"C", {0, 0, 0}}, {"C", {p.r0, 0, 0}}});
  const auto ev = rkt::evaluate_frozen(ff, s, ex.ctx, TermMask::only(EnergyTerm::kBond));
  CHECK(ev.energy[EnergyTerm::kBond] == doctest::Approx(-p.bond_depth * raw_bond_order(p, p.r0, ff.r_bond)));
}

TEST_CASE("no bonds: over-coordination baseline and no forces") {
  const auto& ff = rkt::chon_ff();
  rkt::Exec ex(1);
  const System s = molecule(ff, {{"C", {0, 0, 0}}, {"O", {6, 0, 0}}});
  TermMask mask = TermMask::only(EnergyTerm::kBond);
  mask.enabled[static_cast<std::size_t>(EnergyTerm::kOver)] = true;
  const auto ev = rkt::evaluate_frozen(ff, s, ex.ctx, mask);
  const double expect = ff.p_over * (softplus(-4.0, ff.softplus_k) + softplus(-2.0, ff.softplus_k));
  CHECK(ev.energy[EnergyTerm::kBond] == 0.0);
  CHECK(ev.energy[EnergyTerm::kOver] == doctest::Approx(expect).epsilon(1e-14));
  for (const auto& f : ev.force) CHECK(norm(f) == 0.0);
}

TEST_CASE("angle term") {
  const auto& ff = rkt::water_ff();
  rkt::Exec ex(1);
  const double th = ff.angles[static_cast<std::size_t>(ff.find_type("O"))].theta0;
  const System s = molecule(ff, {{"O", {0, 0, 0}}, {"H", {0.97, 0, 0}}, {"H", {0.97 * std::cos(th), 0.97 * std::sin(th), 0}}});
  const auto ev = rkt::evaluate_frozen(ff, s, ex.ctx, TermMask::only(EnergyTerm::kAngle));
  CHECK(std::abs(ev.energy[EnergyTerm::kAngle]) < 1e-20);
  for (const auto& f : ev.force) CHECK(norm(f) < 1e-12);

  CHECK(bo_ramp(ff.thb_cut, ff.thb_cut) == 0.0);
  CHECK(bo_ramp_derivative(ff.thb_cut, ff.thb_cut) == 0.0);
  CHECK(bo_ramp(0.01, ff.thb_cut) == 0.0);
  CHECK(bo_ramp(1.0, ff.thb_cut) == doctest::Approx(1.0));
}

TEST_CASE("torsion term") {
  ForceField ff = rkt::chon_ff();
  rkt::Exec ex(1);
  // chain with 150-degree bond angles and a chosen dihedral
  auto chain = [&](double phi) {
    const double b = 1.45, theta = 150.0 * M_PI / 180.0;
    const Vec3 p0{0, 0, 0};
    const Vec3 p1{b, 0, 0};
    const Vec3 p2 = p1 + Vec3{-b * std::cos(theta), b * std::sin(theta), 0};
    const Vec3 u = (p2 - p1) * (1.0 / b);
    const Vec3 n1{0, 0, 1};
    const Vec3 m = cross(n1, u);
    const Vec3 dir = u * (-std::cos(theta)) + (m * std::cos(phi) + n1 * std::sin(phi)) * std::sin(theta);
    return molecule(ff, {{"C", p0}, {"C", p1}, {"C", p2}, {"C", p2 + dir * b}});
  };
  SUBCASE("60 degrees gives a vanishing torsion factor") {
    const auto ev = rkt::evaluate_frozen(ff, chain(M_PI / 3.0), ex.ctx, TermMask::only(EnergyTerm::kTorsion));
    CHECK(std::abs(ev.energy[EnergyTerm::kTorsion]) < 1e-12);
  }
  SUBCASE("four-body forces cancel") {
    for (double phi : {0.3, 1.1, 2.0, 2.9}) {
      const auto ev = rkt::evaluate_frozen(ff, chain(phi), ex.ctx, TermMask::only(EnergyTerm::kTorsion));
      CHECK(ev.energy[EnergyTerm::kTorsion] > 0.0);
      const Vec3 sum = net_force(ev.force);
      CHECK(std::abs(sum.x) < 1e-12);
      CHECK(std::abs(sum.y) < 1e-12);
      CHECK(std::abs(sum.z) < 1e-12);
      CHECK(fd_worst(ff, chain(phi), ex.ctx, TermMask::only(EnergyTerm::kTorsion)) <= 1.0);
    }
  }
  SUBCASE("collinear centre bond neighbour gives no term and finite forces") {
    const System s = molecule(ff, {{"C", {0, 0, 0}}, {"C", {1.45, 0, 0}}, {"C", {2.9, 0, 0}}, {"C", {4.156, 0.725, 0}}});
    const auto ev = rkt::evaluate_frozen(ff, s, ex.ctx, TermMask::only(EnergyTerm::kTorsion));
    CHECK(std::abs(ev.energy[EnergyTerm::kTorsion]) < 1e-12);
    for (const auto& f : ev.force) CHECK(std::isfinite(norm(f)));
  }
}

TEST_CASE("hydrogen-bond term") {
  const auto& ff = rkt::water_ff();
  rkt::Exec ex(1);
  SUBCASE("linear contact at the equilibrium distance") {
    const System s = molecule(ff, {{"O", {0, 0, 0}}, {"H", {0.97, 0, 0}}, {"O", {0.97 + ff.hbond.r_eq, 0, 0}}});
    rkt::Exec e1(1);
    EngineOptions opt;
    opt.solve_charges = false;
    opt.terms = TermMask::only(EnergyTerm::kHBond);
    ForceEngine engine(ff, opt, e1.ctx);
    System copy = s;
    copy.state.charge.assign(3, 0.0);
    const auto e = engine.compute(copy.state, copy.box);
    double bo_xh = 0.0;
    for (const auto& b : engine.bonds().row(1)) {
      if (b.j == 0) bo_xh = b.bo;
    }
    REQUIRE(bo_xh >= ff.hbond.donor_bo);
    CHECK(e[EnergyTerm::kHBond] ==
          doctest::Approx(ff.hbond.strength * bo_ramp(bo_xh, ff.hbond.donor_bo)).epsilon(1e-12));
  }
  SUBCASE("acceptor behind the donor gives zero") {
    const System s = molecule(ff, {{"O", {0, 0, 0}}, {"H", {0.97, 0, 0}}, {"O", {-1.5, 0, 0}}});
    const auto ev = rkt::evaluate_frozen(ff, s, ex.ctx, TermMask::only(EnergyTerm::kHBond));
    CHECK(std::abs(ev.energy[EnergyTerm::kHBond]) < 1e-15);
  }
  SUBCASE("random donor-acceptor geometries") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 10; ++t) {
      const Vec3 z{2.0 + 2.5 * (u(rng) + 1.0), 3.0 * u(rng), 3.0 * u(rng)};
      const System s = molecule(ff, {{"O", {0, 0, 0}}, {"H", {0.97, 0.1 * u(rng), 0}}, {"O", z}});
      CHECK(fd_worst(ff, s, ex.ctx, TermMask::only(EnergyTerm::kHBond)) <= 1.0);
    }
  }
}

TEST_CASE("nonbonded examples") {
  const auto& ff = rkt::water_ff();
  rkt::Exec ex(1);
  const auto& o = ff.types[static_cast<std::size_t>(ff.find_type("O"))];
  System s = molecule(ff, {{"O", {0, 0, 0}}, {"O", {o.vdw_radius, 0, 0}}});
  const auto ev = rkt::evaluate_frozen(ff, s, ex.ctx);
  CHECK(ev.energy[EnergyTerm::kVdw] == doctest::Approx(-o.vdw_depth * ff.taper.value(o.vdw_radius)).epsilon(1e-14));
  CHECK(ev.energy[EnergyTerm::kCoulomb] == 0.0);
  s.state.charge = {0.5, 0.0};
  CHECK(rkt::evaluate_frozen(ff, s, ex.ctx).energy[EnergyTerm::kCoulomb] == 0.0);
  s.state.charge = {0.5, -0.5};
  const double expect = ff.coulomb * -0.25 * ff.taper.value(o.vdw_radius) /
                        std::cbrt(std::pow(o.vdw_radius, 3) + std::pow(o.gamma, -3));
  CHECK(rkt::evaluate_frozen(ff, s, ex.ctx).energy[EnergyTerm::kCoulomb] == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("net force vanishes") {
  rkt::Exec ex(3);
  for (int trial = 0; trial < 6; ++trial) {
    const System s = cluster(64, 900 + static_cast<std::uint64_t>(trial), trial % 2 == 0);
    const auto ev = rkt::evaluate_frozen(rkt::chon_ff(), s, ex.ctx);
    const Vec3 sum = net_force(ev.force);
    CHECK(std::abs(sum.x) <= 1e-9);
    CHECK(std::abs(sum.y) <= 1e-9);
    CHECK(std::abs(sum.z) <= 1e-9);
  }
}

TEST_CASE("rigid motion leaves every term unchanged") {
  rkt::Exec ex(2);
  const auto& ff = rkt::chon_ff();
  const System s = cluster(40, 77, false);
  const auto ref = rkt::evaluate_frozen(ff, s, ex.ctx);
  const double a = 0.4, b = -1.1, c = 0.7;
  // rotation about the cluster centre followed by a shift
  const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b), cc = std::cos(c), sc = std::sin(c);
  const double R[3][3] = {{cb * cc, -cb * sc, sb},
                          {sa * sb * cc + ca * sc, -sa * sb * sc + ca * cc, -sa * cb},
                          {-ca * sb * cc + sa * sc, ca * sb * sc + sa * cc, ca * cb}};
  System moved = s;
  const Vec3 centre{11, 11, 11};
  for (auto& p : moved.state.position) {
    const Vec3 d = p - centre;
    p = centre + Vec3{R[0][0] * d.x + R[0][1] * d.y + R[0][2] * d.z, R[1][0] * d.x + R[1][1] * d.y + R[1][2] * d.z,
                      R[2][0] * d.x + R[2][1] * d.y + R[2][2] * d.z} +
        Vec3{0.3, -0.2, 0.45};
  }
  const auto ev = rkt::evaluate_frozen(ff, moved, ex.ctx);
  for (int t = 0; t < kNumEnergyTerms; ++t) {
    CAPTURE(t);
    CHECK(std::abs(ev.energy.terms[static_cast<std::size_t>(t)] - ref.energy.terms[static_cast<std::size_t>(t)]) < 1e-10);
  }
}
