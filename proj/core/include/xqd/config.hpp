#pragma once

// INI run configuration. Sections: [crystal], [source], [source.classical],
// [detector.ancilla], [detector.object], [filters], [scan], [object].
// Every physical key names its unit (pump_energy_ev, pulse_width_ns,
// pump_deviation_deg, ...). Angles are degrees in the file. Unknown
// sections or keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "xqd/imaging.hpp"
#include "xqd/montecarlo.hpp"
#include "xqd/phasematch.hpp"
#include "xqd/postselect.hpp"

namespace xqd {

struct RunConfig {
  phasematch::CrystalGeometry crystal;
  /// Full angular acceptance of the object detector aperture.
  double angular_acceptance_rad = deg_to_rad(0.02);
  /// Illumination for the quantum mode.
  mc::SourceConfig source = mc::quantum_source_defaults();
  /// Illumination for the classical modes and classical histograms.
  mc::SourceConfig classical_source = mc::classical_source_defaults();
  mc::DetectorPair detectors;
  FilterConfig filters;
  ScanConfig scan;
  ObjectMask object;

  /// PDC pair energies from the phase-matching band at the degenerate angle.
  mc::PairEnergySampler pair_sampler() const;
  /// Source profile used by a scan mode.
  const mc::SourceConfig& source_for(ScanMode mode) const;
};

/// Throws Errc::Validation naming the offending section and key.
void validate(const RunConfig& config);

/// Errc::Io if unreadable, Errc::Parse for syntax errors, Errc::Validation
/// for unknown keys and out-of-range values. Missing keys keep defaults.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// Canonical INI text: every key, fixed order, round-trip precision.
/// parse_config(dump_config(c)) reproduces c.
std::string dump_config(const RunConfig& config);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& config);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace xqd
