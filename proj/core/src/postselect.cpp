#include "xqd/postselect.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "xqd/error.hpp"

namespace xqd {

bool FilterConfig::sum_ok(double ancilla_ev, double object_ev) const {
  return std::abs(ancilla_ev + object_ev - pump_energy_ev) <= energy_sum_tolerance_ev;
}

void validate(const FilterConfig& c) {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(c.pump_energy_ev)) throw Error(Errc::InvalidConfig, "filters: pump_energy must be > 0");
  if (!positive(c.energy_sum_tolerance_ev)) throw Error(Errc::InvalidConfig, "filters: energy_sum_tolerance must be > 0");
  if (!positive(c.degeneracy_center_ev)) throw Error(Errc::InvalidConfig, "filters: degeneracy_center must be > 0");
  if (!positive(c.degeneracy_band_width_ev)) throw Error(Errc::InvalidConfig, "filters: degeneracy_band_width must be > 0");
  if (!positive(c.time_cut_ns)) throw Error(Errc::InvalidConfig, "filters: time_cut must be > 0");
  if (c.band_low() <= 0.0 || c.band_high() >= c.pump_energy_ev) {
    throw Error(Errc::InvalidConfig, "filters: degeneracy band must lie inside (0, pump_energy)");
  }
}

namespace {

template <typename Pred>
RecordList keep_if(const RecordList& records, Pred pred) {
  RecordList out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (pred(r)) out.push_back(r);
  }
  return out;
}

bool passes_time(const CoincidenceRecord& r, const FilterConfig& c) {
  return std::abs(static_cast<double>(r.time_difference_ns)) <= c.time_cut_ns;
}

bool passes_band(const CoincidenceRecord& r, const FilterConfig& c) {
  return c.in_band(r.ancilla.energy_ev) && c.in_band(r.object.energy_ev);
}

bool passes_sum(const CoincidenceRecord& r, const FilterConfig& c) {
  return c.sum_ok(r.ancilla.energy_ev, r.object.energy_ev);
}

}  // namespace

RecordList energy_conservation_filter(const RecordList& records, const FilterConfig& config) {
  return keep_if(records, [&](const CoincidenceRecord& r) { return passes_sum(r, config); });
}

RecordList degeneracy_band_filter(const RecordList& records, const FilterConfig& config) {
  return keep_if(records, [&](const CoincidenceRecord& r) { return passes_band(r, config); });
}

RecordList quantum_select(const RecordList& records, const FilterConfig& config) {
  return keep_if(records, [&](const CoincidenceRecord& r) {
    return passes_time(r, config) && passes_band(r, config) && passes_sum(r, config);
  });
}

RecordList classical_coincidence_select(const RecordList& records, const FilterConfig& config, bool apply_band) {
  return keep_if(records, [&](const CoincidenceRecord& r) {
    return passes_time(r, config) && (!apply_band || passes_band(r, config));
  });
}

JointHistogram classical_postselect(const JointHistogram& histogram) {
  JointHistogram out;
  out.window_width_ns = histogram.window_width_ns;
  for (const auto& [cell, n] : histogram.counts) {
    if (cell.first == 0 || cell.second == 0 || n == 0) continue;
    out.counts[cell] = n;
    out.total_windows += n;
  }
  if (out.total_windows == 0) {
    throw Error(Errc::EmptyResult, "classical post-selection: no window has a photon on both detectors");
  }
  return out;
}

DetectorStreams selected_events(const RecordList& records) {
  auto key = [](const DetectionEvent& e) { return std::tie(e.timestamp_ns, e.energy_ev, e.truth); };
  auto less = [&](const DetectionEvent& a, const DetectionEvent& b) { return key(a) < key(b); };
  auto same = [&](const DetectionEvent& a, const DetectionEvent& b) { return key(a) == key(b); };
  DetectorStreams out;
  for (const auto& r : records) {
    out.ancilla.push_back(r.ancilla);
    out.object.push_back(r.object);
  }
  for (auto* s : {&out.ancilla, &out.object}) {
    std::sort(s->begin(), s->end(), less);
    s->erase(std::unique(s->begin(), s->end(), same), s->end());
  }
  return out;
}

EventStream band_events(EventView stream, const FilterConfig& config) {
  EventStream out;
  for (const auto& e : stream) {
    if (config.in_band(e.energy_ev)) out.push_back(e);
  }
  return out;
}

}  // namespace xqd
