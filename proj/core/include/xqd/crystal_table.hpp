#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace xqd::phasematch {

/// Editable table of cubic lattice constants, one INI section per material:
///
///   [diamond]
///   lattice_constant_angstrom = 3.56679
class CrystalTable {
 public:
  static CrystalTable load(const std::filesystem::path& path);
  /// Table shipped in the data directory.
  static CrystalTable load_default();
  static std::filesystem::path default_path();

  /// Throws Errc::Validation for unknown materials.
  double lattice_constant(const std::string& material) const;
  bool contains(const std::string& material) const { return entries_.contains(material); }
  const std::map<std::string, double>& entries() const { return entries_; }

 private:
  std::map<std::string, double> entries_;
};

}  // namespace xqd::phasematch
