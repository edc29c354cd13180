#pragma once

// Truth-level emission streams and the detector response that turns them
// into per-detector event streams.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "xqd/events.hpp"
#include "xqd/phasematch.hpp"
#include "xqd/rng.hpp"

namespace xqd::mc {

struct SpectrumSegment {
  double low_ev = 0.0;
  double high_ev = 0.0;
  double weight = 0.0;
};

struct SpectrumLine {
  double energy_ev = 0.0;
  double weight = 0.0;
};

/// Piecewise-uniform density plus discrete lines; weights sum to one.
class EnergySpectrum {
 public:
  /// Uniform over 9-13 keV.
  EnergySpectrum();
  EnergySpectrum(std::vector<SpectrumSegment> segments, std::vector<SpectrumLine> lines);

  static EnergySpectrum uniform(double low_ev, double high_ev);
  static EnergySpectrum line(double energy_ev);

  void validate() const;
  double sample(Rng& rng) const;
  /// Unsmeared probability mass in [low, high].
  double mass_between(double low_ev, double high_ev) const;
  double support_low() const;
  double support_high() const;

  const std::vector<SpectrumSegment>& segments() const { return segments_; }
  const std::vector<SpectrumLine>& lines() const { return lines_; }

 private:
  void rebuild_cdf();

  std::vector<SpectrumSegment> segments_;
  std::vector<SpectrumLine> lines_;
  std::vector<double> cdf_;  // over segments then lines
};

struct SourceConfig {
  /// Pairs per second whose two photons reach the two detector apertures.
  double pdc_pair_rate_hz = 0.0;
  double noise_rate_ancilla_hz = 0.0;
  double noise_rate_object_ambient_hz = 0.0;
  /// Uncorrelated radiation that passes through the object before reaching
  /// the object detector (scaled by the object transmission).
  double noise_rate_object_transmitted_hz = 0.0;
  /// Fluorescence rate at full opacity (scaled by 1 - transmission).
  double object_fluorescence_coefficient_hz = 0.0;
  EnergySpectrum noise_spectrum;
  double run_duration_s = 1.0;
};

void validate(const SourceConfig& source);

/// Paper-calibrated PDC acquisition: ~100 post-selected pairs per hour and
/// object-detector noise in the 9-13 keV PDC range 1e4 times the PDC singles.
SourceConfig quantum_source_defaults();

/// Classical illumination used for the classical comparison modes: strong
/// uncorrelated radiation on both detectors with a minor PDC admixture.
SourceConfig classical_source_defaults();

struct DetectorConfig {
  double quantum_efficiency = 1.0;
  /// Gaussian std-dev of the measured energy, eV.
  double energy_sigma_ev = 354.0;
  /// Non-paralyzable dead time, ns.
  double dead_time_ns = 100.0;
  double logic_pulse_width_ns = 1000.0;
  double calibration_gain = 1.0;
};

void validate(const DetectorConfig& detector);

struct DetectorPair {
  DetectorConfig ancilla;
  DetectorConfig object;
};

/// Joint (ancilla, object) energy distribution of PDC pairs: object energy
/// uniform on [center - width/2, center + width/2], ancilla = pump - object.
class PairEnergySampler {
 public:
  PairEnergySampler() = default;
  PairEnergySampler(double pump_energy_ev, double object_center_ev, double object_width_ev);

  static PairEnergySampler degenerate(double pump_energy_ev);
  /// Object-detector band taken from the phase-matching curve at the
  /// degenerate signal angle with the given full angular acceptance.
  static PairEnergySampler from_phase_matching(const phasematch::CrystalGeometry& geometry,
                                               double angular_acceptance_rad);

  std::pair<double, double> sample(Rng& rng) const;

  double pump_energy_ev() const { return pump_; }
  double object_center_ev() const { return center_; }
  double object_width_ev() const { return width_; }
  EnergySpectrum object_spectrum() const;
  EnergySpectrum ancilla_spectrum() const;

 private:
  double pump_ = 22300.0;
  double center_ = 11150.0;
  double width_ = 0.0;
};

struct EmissionTruth {
  double time_ns = 0.0;
  TruthKind kind = TruthKind::None;
  std::optional<double> ancilla_energy_ev;
  std::optional<double> object_energy_ev;
  /// For PDC pairs: the object photon survived the object.
  bool transmitted = false;
};

/// Restricts object-only emissions (ambient, fluorescence, transmitted) to
/// [t - before_ns, t + after_ns] around every ancilla-side emission t. Inside
/// the gates the processes are unchanged, so anything that only looks at
/// object events near ancilla events is statistically unaffected.
struct ObjectGate {
  double before_ns = 0.0;
  double after_ns = 0.0;
};

void validate(const ObjectGate& gate);

/// Gate wide enough for coincidence counting with these detectors: the
/// object pulse width plus its dead time before, the ancilla pulse width after.
ObjectGate coincidence_gate(const DetectorPair& detectors);

/// Independent homogeneous Poisson processes per emission kind, merged in
/// time order. PDC object photons are thinned by object_transmission;
/// fluorescence runs at coefficient * (1 - T), transmitted noise at rate * T.
std::vector<EmissionTruth> generate_truth(const SourceConfig& source, double pump_energy_ev,
                                          const PairEnergySampler& pairs, double object_transmission,
                                          std::uint64_t seed, const std::optional<ObjectGate>& gate = std::nullopt);

/// Stateful detector response so long runs can be processed shard by shard
/// with dead time carried across shard boundaries.
class DetectorResponse {
 public:
  DetectorResponse(const DetectorPair& detectors, std::uint64_t seed);

  /// Truth must be time-sorted; time_offset_ns is added to every emission.
  void process(std::span<const EmissionTruth> truth, double time_offset_ns, DetectorStreams& out);

 private:
  struct Channel {
    DetectorConfig config;
    DetectorId id;
    Rng rng;
    bool has_last = false;
    std::uint64_t last_ns = 0;

    void offer(double time_ns, double energy_ev, TruthKind kind, EventStream& out);
  };

  Channel ancilla_;
  Channel object_;
};

/// QE thinning, non-paralyzable dead time on the integer-ns timestamp, then
/// Gaussian smearing with gain, per detector. Smeared energies <= 0 are
/// dropped. Non-transmitted PDC object photons never register.
DetectorStreams detect(std::span<const EmissionTruth> truth, const DetectorConfig& ancilla,
                       const DetectorConfig& object, std::uint64_t seed);

struct AcquisitionOptions {
  /// Bound on expected emissions held in memory at once.
  double max_emissions_per_shard = 1 << 18;
  /// Gated acquisition: object singles far from ancilla events are skipped.
  std::optional<ObjectGate> object_gate;
};

/// generate_truth + detect over source.run_duration_s, split into equal time
/// shards. Shard i draws its truth from derive_seed(seed, 1, i); one detector
/// response seeded with derive_seed(seed, 2) processes the shards in order.
DetectorStreams acquire(const SourceConfig& source, double pump_energy_ev, const PairEnergySampler& pairs,
                        double object_transmission, const DetectorPair& detectors, std::uint64_t seed,
                        const AcquisitionOptions& options = {});

/// Expected number of emissions over the run (all kinds).
double expected_emissions(const SourceConfig& source, double object_transmission,
                          const std::optional<ObjectGate>& gate = std::nullopt);

}  // namespace xqd::mc
