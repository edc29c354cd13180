#include "xqd/crystal_table.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdlib>

#include "xqd/error.hpp"

#ifndef XQD_DATA_DIR
#define XQD_DATA_DIR "data"
#endif

namespace xqd::phasematch {

namespace pt = boost::property_tree;

CrystalTable CrystalTable::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(Errc::Io, "crystal table " + path.string() + " not found");
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::Parse, "crystal table " + path.string() + ": " + e.what());
  }

  CrystalTable table;
  for (const auto& [name, section] : tree) {
    double a = 0.0;
    try {
      a = section.get<double>("lattice_constant_angstrom");
    } catch (const pt::ptree_error&) {
      throw Error(Errc::Validation, "crystal table " + path.string() + ": [" + name +
                                        "] needs a numeric lattice_constant_angstrom");
    }
    if (!(a > 0.0)) {
      throw Error(Errc::Validation, "crystal table: [" + name + "] lattice constant must be positive");
    }
    table.entries_[name] = a;
  }
  return table;
}

std::filesystem::path CrystalTable::default_path() {
  if (const char* env = std::getenv("XQD_DATA_DIR")) return std::filesystem::path(env) / "crystals.ini";
  return std::filesystem::path(XQD_DATA_DIR) / "crystals.ini";
}

CrystalTable CrystalTable::load_default() { return load(default_path()); }

double CrystalTable::lattice_constant(const std::string& material) const {
  auto it = entries_.find(material);
  if (it == entries_.end()) throw Error(Errc::Validation, "unknown crystal material '" + material + "'");
  return it->second;
}

}  // namespace xqd::phasematch
