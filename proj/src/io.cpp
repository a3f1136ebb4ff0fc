#include "reaxkit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "reaxkit/error.hpp"

namespace reaxkit {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::uint8_t parse_hbond_role(const std::string& value, const std::string& context) {
  std::uint8_t role = kHBondNone;
  for (const auto& part : split_on(value, '+')) {
    const auto p = trim(part);
    if (p == "none") continue;
    if (p == "hydrogen") {
      role |= kHBondHydrogen;
    } else if (p == "donor") {
      role |= kHBondDonor;
    } else if (p == "acceptor") {
      role |= kHBondAcceptor;
    } else {
      throw InputError(context + ": unknown hbond role '" + p + "'");
    }
  }
  return role;
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source) {
  std::vector<KeyValue> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
    if (kv.key.empty() || kv.value.empty()) {
      throw InputError(source + ":" + std::to_string(lineno) + ": empty key or value");
    }
    out.push_back(std::move(kv));
  }
  return out;
}

double parse_double(const std::string& text, const std::string& context) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw InputError(context + ": expected a number, got '" + text + "'");
  }
  return v;
}

long parse_long(const std::string& text, const std::string& context) {
  long v = 0;
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, v);
  if (ec != std::errc() || ptr != last) throw InputError(context + ": expected an integer, got '" + text + "'");
  return v;
}

ForceField parse_forcefield(std::istream& in, const std::string& source) {
  const auto entries = parse_key_values(in, source);

  ForceField ff;
  std::map<std::string, std::map<std::string, std::string>> atom_keys;
  std::vector<std::string> atom_order;
  struct PairEntry {
    std::map<std::string, double> values;
    int line = 0;
  };
  std::map<std::string, PairEntry> pair_keys;  // "A-B" as written
  std::map<std::string, std::map<std::string, double>> angle_keys;
  std::optional<double> r_nonb, r_bond;

  for (const auto& kv : entries) {
    const std::string where = source + ":" + std::to_string(kv.line);
    const auto parts = split_on(kv.key, '.');
    const std::string& section = parts[0];
    if (section == "global" && parts.size() == 2) {
      const double v = parse_double(kv.value, where);
      const auto& k = parts[1];
      if (k == "r_nonb") {
        r_nonb = v;
      } else if (k == "r_bond") {
        r_bond = v;
      } else if (k == "thb_cut") {
        ff.thb_cut = v;
      } else if (k == "p_over") {
        ff.p_over = v;
      } else if (k == "lambda") {
        ff.lambda = v;
      } else if (k == "softplus_k") {
        ff.softplus_k = v;
      } else if (k == "coulomb") {
        ff.coulomb = v;
      } else {
        throw InputError(where + ": unknown key '" + kv.key + "'");
      }
    } else if (section == "atom" && parts.size() == 3) {
      if (!atom_keys.contains(parts[1])) atom_order.push_back(parts[1]);
      atom_keys[parts[1]][parts[2]] = kv.value;
    } else if (section == "pair" && parts.size() == 3) {
      auto& e = pair_keys[parts[1]];
      e.values[parts[2]] = parse_double(kv.value, where);
      e.line = kv.line;
    } else if (section == "angle" && parts.size() == 3) {
      angle_keys[parts[1]][parts[2]] = parse_double(kv.value, where);
    } else if (section == "torsion" && parts.size() == 2 && parts[1] == "k") {
      ff.torsion.k_phi = parse_double(kv.value, where);
    } else if (section == "hbond" && parts.size() == 2) {
      const double v = parse_double(kv.value, where);
      const auto& k = parts[1];
      if (k == "p") {
        ff.hbond.strength = v;
      } else if (k == "r0") {
        ff.hbond.r_eq = v;
      } else if (k == "cutoff") {
        ff.hbond.cutoff = v;
      } else if (k == "donor_bo") {
        ff.hbond.donor_bo = v;
      } else if (k == "switch_start") {
        ff.hbond.switch_start = v;
      } else {
        throw InputError(where + ": unknown key '" + kv.key + "'");
      }
    } else {
      throw InputError(where + ": unknown key '" + kv.key + "'");
    }
  }

  ff.r_nonb = r_nonb.value_or(10.0);
  ff.r_bond = r_bond.value_or(5.0);
  if (ff.r_bond > ff.r_nonb) throw InputError(source + ": bond cutoff exceeds nonbonded cutoff");
  ff.taper = Taper(ff.r_nonb);

  static const char* kRequired[] = {"mass", "valence", "chi", "eta", "gamma", "vdw_D", "vdw_alpha", "vdw_r"};
  for (const auto& sym : atom_order) {
    const auto& keys = atom_keys[sym];
    for (const char* req : kRequired) {
      if (!keys.contains(req)) {
        throw InputError(source + ": atom type " + sym + " is missing required key atom." + sym + "." + req);
      }
    }
    AtomType t;
    t.symbol = sym;
    const std::string ctx = source + ": atom." + sym;
    for (const auto& [k, v] : keys) {
      if (k == "mass") {
        t.mass = parse_double(v, ctx + ".mass");
      } else if (k == "valence") {
        t.valence = parse_double(v, ctx + ".valence");
      } else if (k == "chi") {
        t.chi = parse_double(v, ctx + ".chi") * units::kEvToKcal;
      } else if (k == "eta") {
        t.eta = parse_double(v, ctx + ".eta") * units::kEvToKcal;
      } else if (k == "gamma") {
        t.gamma = parse_double(v, ctx + ".gamma");
      } else if (k == "vdw_D") {
        t.vdw_depth = parse_double(v, ctx + ".vdw_D");
      } else if (k == "vdw_alpha") {
        t.vdw_alpha = parse_double(v, ctx + ".vdw_alpha");
      } else if (k == "vdw_r") {
        t.vdw_radius = parse_double(v, ctx + ".vdw_r");
      } else if (k == "hbond") {
        t.hbond_role = parse_hbond_role(v, ctx + ".hbond");
      } else {
        throw InputError(ctx + ": unknown key '" + k + "'");
      }
    }
    ff.types.push_back(std::move(t));
  }

  const std::size_t nt = ff.types.size();
  ff.pairs.assign(nt * nt, PairParams{});
  ff.angles.assign(nt, AngleParams{});
  std::vector<bool> pair_seen(nt * nt, false);

  for (const auto& [name, entry] : pair_keys) {
    const std::string where = source + ":" + std::to_string(entry.line);
    const auto syms = split_on(name, '-');
    if (syms.size() != 2) throw InputError(where + ": pair name must be A-B, got '" + name + "'");
    const int a = ff.find_type(syms[0]);
    const int b = ff.find_type(syms[1]);
    if (a < 0 || b < 0) throw InputError(where + ": pair " + name + " references an unknown element");
    PairParams p;
    p.bonding = true;
    for (const char* req : {"r0", "p_bo1", "p_bo2", "De"}) {
      if (!entry.values.contains(req)) throw InputError(where + ": pair " + name + " is missing key " + req);
    }
    for (const auto& [k, v] : entry.values) {
      if (k == "r0") {
        p.r0 = v;
      } else if (k == "p_bo1") {
        p.p_bo1 = v;
      } else if (k == "p_bo2") {
        p.p_bo2 = v;
      } else if (k == "De") {
        p.bond_depth = v;
      } else if (k == "bo_cut") {
        p.bo_cut = v;
      } else {
        throw InputError(where + ": unknown pair key '" + k + "'");
      }
    }
    const std::size_t ab = static_cast<std::size_t>(a) * nt + b;
    const std::size_t ba = static_cast<std::size_t>(b) * nt + a;
    if (pair_seen[ab]) {
      const auto& q = ff.pairs[ab];
      if (q.r0 != p.r0 || q.p_bo1 != p.p_bo1 || q.p_bo2 != p.p_bo2 || q.bond_depth != p.bond_depth ||
          q.bo_cut != p.bo_cut) {
        throw InputError(where + ": pair " + name + " conflicts with its mirrored entry");
      }
    }
    ff.pairs[ab] = p;
    ff.pairs[ba] = p;
    pair_seen[ab] = pair_seen[ba] = true;
  }

  for (const auto& [sym, keys] : angle_keys) {
    const int t = ff.find_type(sym);
    if (t < 0) throw InputError(source + ": angle." + sym + " references an unknown element");
    auto& ang = ff.angles[static_cast<std::size_t>(t)];
    for (const auto& [k, v] : keys) {
      if (k == "k") {
        ang.k_theta = v;
      } else if (k == "theta0") {
        ang.theta0 = v * std::numbers::pi / 180.0;
      } else {
        throw InputError(source + ": unknown angle key '" + k + "'");
      }
    }
  }

  ff.validate();
  return ff;
}

ForceField load_forcefield(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open force-field file " + path.string());
  return parse_forcefield(in, path.string());
}

System parse_system(std::istream& in, const ForceField& ff, const std::string& source) {
  std::string line;
  int lineno = 0;
  auto next_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++lineno;
      if (!trim(out).empty()) return true;
    }
    return false;
  };
  auto where = [&] { return source + ":" + std::to_string(lineno); };

  if (!next_line(line)) throw InputError(source + ": no atoms");
  const long count = parse_long(trim(line), where());
  if (count < 0) throw InputError(where() + ": negative atom count");

  System sys;
  if (!next_line(line)) throw InputError(source + ": box missing");
  const auto box_tok = split_ws(line);
  if (box_tok.empty() || box_tok[0] != "box" || (box_tok.size() != 4 && box_tok.size() != 8)) {
    throw InputError(where() + ": box missing (expected 'box Lx Ly Lz [pbc px py pz]')");
  }
  for (int k = 0; k < 3; ++k) sys.box.lengths[k] = parse_double(box_tok[1 + k], where());
  if (box_tok.size() == 8) {
    if (box_tok[4] != "pbc") throw InputError(where() + ": expected 'pbc'");
    for (int k = 0; k < 3; ++k) sys.box.periodic[k] = parse_long(box_tok[5 + k], where()) != 0;
  }
  for (int k = 0; k < 3; ++k) {
    if (!(sys.box.lengths[k] > 0.0)) throw InputError(where() + ": box lengths must be positive");
  }

  auto& st = sys.state;
  while (next_line(line)) {
    const auto tok = split_ws(line);
    if (tok.size() != 4 && tok.size() != 5 && tok.size() != 8) {
      throw InputError(where() + ": malformed atom line (expected 'element x y z [q] [vx vy vz]')");
    }
    const int t = ff.find_type(tok[0]);
    if (t < 0) throw InputError(where() + ": unknown element '" + tok[0] + "'");
    st.type.push_back(t);
    st.position.push_back({parse_double(tok[1], where()), parse_double(tok[2], where()), parse_double(tok[3], where())});
    st.charge.push_back(tok.size() >= 5 ? parse_double(tok[4], where()) : 0.0);
    if (tok.size() == 8) {
      st.velocity.push_back({parse_double(tok[5], where()), parse_double(tok[6], where()), parse_double(tok[7], where())});
    } else {
      st.velocity.push_back({});
    }
  }
  if (st.type.empty()) throw InputError(source + ": no atoms");
  if (static_cast<long>(st.type.size()) != count) {
    throw InputError(source + ": header declares " + std::to_string(count) + " atoms but " +
                     std::to_string(st.type.size()) + " were read");
  }
  st.force.assign(st.type.size(), Vec3{});
  return sys;
}

System load_system(const std::filesystem::path& path, const ForceField& ff) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open system file " + path.string());
  return parse_system(in, ff, path.string());
}

void write_system(std::ostream& out, const System& system, const ForceField& ff) {
  const auto& st = system.state;
  const auto& box = system.box;
  out << st.size() << '\n';
  out << std::setprecision(17);
  out << "box " << box.lengths.x << ' ' << box.lengths.y << ' ' << box.lengths.z << " pbc " << box.periodic[0] << ' '
      << box.periodic[1] << ' ' << box.periodic[2] << '\n';
  for (std::size_t i = 0; i < st.size(); ++i) {
    const auto& r = st.position[i];
    const auto& v = st.velocity[i];
    out << ff.types[static_cast<std::size_t>(st.type[i])].symbol << ' ' << r.x << ' ' << r.y << ' ' << r.z << ' '
        << st.charge[i] << ' ' << v.x << ' ' << v.y << ' ' << v.z << '\n';
  }
}

void save_system(const std::filesystem::path& path, const System& system, const ForceField& ff) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write system file " + path.string());
  write_system(out, system, ff);
  if (!out) throw InputError("failed writing system file " + path.string());
}

}  // namespace reaxkit
