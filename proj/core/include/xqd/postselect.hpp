#pragma once

// Record-level selections (energy sum, degeneracy band, time) and the
// classical at-least-one-photon window selection.

#include "xqd/coincidence.hpp"

namespace xqd {

struct FilterConfig {
  double pump_energy_ev = 22300.0;
  /// Hard window on |E_a + E_o - pump|.
  double energy_sum_tolerance_ev = 500.0;
  double degeneracy_center_ev = 11150.0;
  /// Full width, applied to each detector separately.
  double degeneracy_band_width_ev = 2000.0;
  double time_cut_ns = 250.0;

  double band_low() const { return degeneracy_center_ev - 0.5 * degeneracy_band_width_ev; }
  double band_high() const { return degeneracy_center_ev + 0.5 * degeneracy_band_width_ev; }
  bool in_band(double energy_ev) const { return energy_ev >= band_low() && energy_ev <= band_high(); }
  bool sum_ok(double ancilla_ev, double object_ev) const;
};

void validate(const FilterConfig& config);

RecordList energy_conservation_filter(const RecordList& records, const FilterConfig& config);
RecordList degeneracy_band_filter(const RecordList& records, const FilterConfig& config);

/// time_cut, degeneracy band and energy sum: the quantum detection mode.
RecordList quantum_select(const RecordList& records, const FilterConfig& config);

/// time_cut, optionally followed by the degeneracy band: the classical
/// coincidence mode (no energy-sum requirement).
RecordList classical_coincidence_select(const RecordList& records, const FilterConfig& config, bool apply_band);

/// Drops windows without a photon on each detector. Errc::EmptyResult when
/// nothing survives.
JointHistogram classical_postselect(const JointHistogram& histogram);

/// The distinct ancilla and object events taking part in the records, each
/// stream time-sorted. Used to histogram post-selected photons per window.
DetectorStreams selected_events(const RecordList& records);

/// Events whose energy lies in the degeneracy band.
EventStream band_events(EventView stream, const FilterConfig& config);

}  // namespace xqd
