#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "reaxkit/core.hpp"

namespace reaxkit {

/// One `key = value` line from a text configuration file.
struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// Reads `key = value` lines; `#` starts a comment, blank lines are skipped.
std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source);

double parse_double(const std::string& text, const std::string& context);
long parse_long(const std::string& text, const std::string& context);

/// Force-field file, see README for the key list.  Electronegativity and
/// hardness are converted from eV here.
ForceField parse_forcefield(std::istream& in, const std::string& source = "<stream>");
ForceField load_forcefield(const std::filesystem::path& path);

/// System file:
///   line 1: atom count
///   line 2: box Lx Ly Lz [pbc px py pz]
///   then one `element x y z [q] [vx vy vz]` line per atom.
System parse_system(std::istream& in, const ForceField& ff, const std::string& source = "<stream>");
System load_system(const std::filesystem::path& path, const ForceField& ff);

void write_system(std::ostream& out, const System& system, const ForceField& ff);
void save_system(const std::filesystem::path& path, const System& system, const ForceField& ff);

}  // namespace reaxkit
