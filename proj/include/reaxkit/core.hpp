#pragma once

// Domain types for reax-kit: simulation box, force-field parameter tables and
// the per-atom system state.
//
// Units throughout: length in Å, time in fs, charge in e, energy in kcal/mol,
// force in kcal/mol/Å, mass in g/mol.  Electronegativity and hardness are read
// in eV from the force-field file and converted once at load time.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "reaxkit/vec3.hpp"

namespace reaxkit {

namespace units {
inline constexpr double kCoulomb = 332.0638;          // kcal·Å/(mol·e²)
inline constexpr double kEvToKcal = 23.0609;          // kcal/mol per eV
inline constexpr double kBoltzmann = 0.0019872041;    // kcal/(mol·K)
// m·v² in (g/mol)·(Å/fs)² expressed in kcal/mol.
inline constexpr double kMvvToKcal = 2390.057361;
}  // namespace units

struct SimBox {
  Vec3 lengths{};
  std::array<bool, 3> periodic{true, true, true};

  double volume() const { return lengths.x * lengths.y * lengths.z; }
};

/// Wraps each periodic component of `dr` into the half-open interval [-L/2, L/2).
Vec3 min_image(Vec3 dr, const SimBox& box);

/// Wraps a position into [0, L) on periodic axes.
Vec3 wrap_position(Vec3 r, const SimBox& box);

/// Checks lengths > 0 and, on periodic axes, L >= 2 * cutoff.
void validate_box(const SimBox& box, double nonbonded_cutoff);

enum HBondRole : std::uint8_t {
  kHBondNone = 0,
  kHBondHydrogen = 1,
  kHBondDonor = 2,
  kHBondAcceptor = 4,
};

struct AtomType {
  std::string symbol;
  double mass = 0.0;
  double valence = 0.0;
  double chi = 0.0;        // kcal/mol/e after conversion
  double eta = 0.0;        // kcal/mol/e² after conversion
  double gamma = 0.0;      // Å⁻¹
  double vdw_depth = 0.0;  // kcal/mol
  double vdw_alpha = 0.0;  // Å⁻¹
  double vdw_radius = 0.0; // Å
  std::uint8_t hbond_role = kHBondNone;

  bool is_hbond_hydrogen() const { return (hbond_role & kHBondHydrogen) != 0; }
  bool is_hbond_donor() const { return (hbond_role & kHBondDonor) != 0; }
  bool is_hbond_acceptor() const { return (hbond_role & kHBondAcceptor) != 0; }
};

struct PairParams {
  bool bonding = false;  // false: the type pair never forms bonds
  double r0 = 1.0;
  double p_bo1 = -0.1;
  double p_bo2 = 6.0;
  double bond_depth = 0.0;  // De
  double bo_cut = 1.0e-3;
};

struct AngleParams {
  double k_theta = 0.0;
  double theta0 = 0.0;  // rad
};

struct TorsionParams {
  double k_phi = 0.0;
};

struct HBondParams {
  double strength = 0.0;      // p_hb
  double r_eq = 2.0;          // r_hb, Å
  double cutoff = 6.0;        // Å
  double donor_bo = 0.3;      // minimum corrected BO of the X-H donor bond
  double switch_start = 4.5;  // radial switch begins here and ends at cutoff
};

/// Seventh-degree switching polynomial T(r) = Σ c_k r^k on [0, R] with
/// T(0) = 1, T(R) = 0 and vanishing first three derivatives at both ends.
class Taper {
 public:
  Taper() = default;
  explicit Taper(double cutoff);

  double cutoff() const { return cutoff_; }
  const std::array<double, 8>& coefficients() const { return coeff_; }

  double value(double r) const;
  /// dT/dr.
  double derivative(double r) const;

 private:
  double cutoff_ = 0.0;
  std::array<double, 8> coeff_{};
};

/// Smooth 7th-degree step from 1 at `start` to 0 at `stop` (same polynomial
/// as Taper, mapped onto [start, stop]).
struct SmoothSwitch {
  double start = 0.0;
  double stop = 1.0;

  double value(double r) const;
  double derivative(double r) const;
};

struct ForceField {
  std::vector<AtomType> types;
  std::vector<PairParams> pairs;        // ntypes × ntypes, symmetric
  std::vector<AngleParams> angles;      // keyed by centre type
  TorsionParams torsion;
  HBondParams hbond;

  double r_nonb = 10.0;
  double r_bond = 5.0;
  double thb_cut = 0.05;
  double p_over = 50.0;
  double lambda = 0.5;
  double softplus_k = 10.0;
  double coulomb = units::kCoulomb;
  Taper taper{10.0};

  std::size_t num_types() const { return types.size(); }
  const PairParams& pair(int a, int b) const { return pairs[static_cast<std::size_t>(a) * types.size() + b]; }
  PairParams& pair(int a, int b) { return pairs[static_cast<std::size_t>(a) * types.size() + b]; }

  /// Index of the element symbol, or -1.
  int find_type(std::string_view symbol) const;

  /// Checks every parameter invariant; throws InputError.
  void validate() const;
};

/// Raw bond order for a pair at distance r, shifted so it reaches zero at
/// r_bond and clamped at zero beyond.
double raw_bond_order(const PairParams& p, double r, double r_bond);
/// d(raw_bond_order)/dr.
double raw_bond_order_derivative(const PairParams& p, double r, double r_bond);

struct SystemState {
  std::vector<int> type;
  std::vector<Vec3> position;
  std::vector<Vec3> velocity;
  std::vector<double> charge;
  std::vector<Vec3> force;
  double net_charge = 0.0;
  long step = 0;

  std::size_t size() const { return type.size(); }
  void resize(std::size_t n);
};

struct System {
  SystemState state;
  SimBox box;
};

inline constexpr std::size_t kDefaultMaxAtoms = 50'000'000;

/// Tiles the periodic cell nx × ny × nz times.  Replica order is x fastest,
/// and within each replica atoms keep their original order.
System replicate(const SystemState& state, const SimBox& box, int nx, int ny, int nz,
                 std::size_t max_atoms = kDefaultMaxAtoms);

}  // namespace reaxkit
