#pragma once

// Closed-form expected rates for the simulated acquisition: singles with a
// non-paralyzable live fraction, true coincidences, and accidental
// coincidences passing each selection. Energy cuts are evaluated on the
// Gaussian-smeared spectra; accidental energy-sum acceptance by binned
// convolution over the degeneracy band.

#include "xqd/montecarlo.hpp"
#include "xqd/postselect.hpp"
#include "xqd/stats.hpp"

namespace xqd::mc {

/// Probability that gain * (E + sigma Z) lands in [low, high] for E drawn
/// from the spectrum.
double smeared_window_probability(const EnergySpectrum& spectrum, double sigma_ev, double gain, double low_ev,
                                  double high_ev);

/// Width (ns) of the set of integer time differences accepted by an AND
/// gate of the given pulse width followed by |dt| <= time_cut. Timestamps
/// are floored to whole ns, so a cut c admits 2 floor(c) + 1 values.
double coincidence_window_ns(double pulse_width_ns, double time_cut_ns);

struct ModeRate {
  double true_hz = 0.0;
  double accidental_hz = 0.0;

  double total_hz() const { return true_hz + accidental_hz; }
};

class RateModel {
 public:
  RateModel(const SourceConfig& source, const PairEnergySampler& pairs, const DetectorPair& detectors,
            const FilterConfig& filters);

  /// Detected singles (after QE and dead time), optionally restricted to
  /// the degeneracy band.
  double ancilla_singles_hz(bool band_only) const;
  double object_singles_hz(double transmission, bool band_only) const;

  double ancilla_live_fraction() const;
  double object_live_fraction(double transmission) const;

  /// Pairs surviving quantum_select.
  ModeRate quantum(double transmission) const;
  /// AND gate + time cut, degeneracy band optional.
  ModeRate classical_coincidence(double transmission, bool apply_band) const;
  /// Object-detector events in the band; all counted as true signal.
  ModeRate classical_singles(double transmission) const;

  ModeRate mode_rate(ScanMode mode, double transmission, bool band_in_mode_c = true) const;

  /// Probability that a detected true pair passes the chosen energy cuts.
  double true_pair_pass_probability(bool band, bool energy_sum) const;

  double window_ns() const { return window_ns_; }

 private:
  struct Component {
    double rate_hz;  // photon rate at the detector, before QE
    EnergySpectrum spectrum;
  };

  std::vector<Component> ancilla_components() const;
  std::vector<Component> object_components(double transmission) const;
  double accidental_pass(const EnergySpectrum& ancilla, const EnergySpectrum& object, bool energy_sum) const;

  SourceConfig source_;
  PairEnergySampler pairs_;
  DetectorPair detectors_;
  FilterConfig filters_;
  double window_ns_;
};

/// Object-detector noise over PDC object singles, both counted as photon
/// rates inside [range_low, range_high] at the given transmission.
double noise_to_signal_ratio(const SourceConfig& source, const PairEnergySampler& pairs, double transmission = 1.0,
                             double range_low_ev = 9000.0, double range_high_ev = 13000.0);

struct QuantumCalibration {
  double post_selected_per_hour = 100.0;
  /// Object ambient noise / PDC object singles in the PDC energy range.
  double noise_ratio = 1.0e4;
  /// Ancilla noise rate as a fraction of the pair rate.
  double ancilla_noise_fraction = 0.1;
  double range_low_ev = 9000.0;
  double range_high_ev = 13000.0;
};

/// Pair and noise rates meeting the calibration targets at full
/// transmission, with run_duration and noise spectrum taken from base.
SourceConfig calibrate_quantum_source(const SourceConfig& base, const PairEnergySampler& pairs,
                                      const DetectorPair& detectors, const FilterConfig& filters,
                                      const QuantumCalibration& target = {});

}  // namespace xqd::mc
