#pragma once

// AND-gate coincidence matching and windowed joint photon-number histograms.

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "xqd/events.hpp"

namespace xqd {

struct CoincidenceRecord {
  DetectionEvent ancilla;
  DetectionEvent object;
  /// object - ancilla, ns.
  std::int64_t time_difference_ns = 0;

  friend bool operator==(const CoincidenceRecord&, const CoincidenceRecord&) = default;
};

using RecordList = std::vector<CoincidenceRecord>;

/// Throws Errc::UnsortedInput naming the first regressing index.
void require_sorted(EventView stream, const char* label);

/// Every (ancilla, object) pair whose logic pulses [t, t + pulse_width)
/// overlap, i.e. |t_o - t_a| < pulse_width. Two cursors, linear in the
/// stream lengths plus the output size. Grouped per ancilla event in stream
/// order, object timestamps ascending within a group.
RecordList and_gate_match(EventView ancilla, EventView object, double pulse_width_ns);

/// Asymmetric pulses: keeps pairs with -object_width < t_o - t_a < ancilla_width.
RecordList and_gate_match(EventView ancilla, EventView object, double ancilla_width_ns, double object_width_ns);

/// Keeps records with |time_difference| <= max_abs_difference_ns.
RecordList time_cut(const RecordList& records, double max_abs_difference_ns);

enum class WindowAnchor { AncillaTriggered, FixedClock };

struct JointHistogram {
  /// (n_ancilla, n_object) -> number of windows.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> counts;
  double window_width_ns = 0.0;
  std::uint64_t total_windows = 0;

  std::uint64_t at(std::uint32_t n_ancilla, std::uint32_t n_object) const;
  /// Fraction of windows in the given cell.
  double probability(std::uint32_t n_ancilla, std::uint32_t n_object) const;
  /// Adds every cell of other (window widths must match).
  void merge(const JointHistogram& other);
};

/// AncillaTriggered: one window [t_a, t_a + width) per ancilla event that
/// falls outside the previous window. FixedClock: windows [k w, (k+1) w)
/// tiling [0, duration_ns); duration_ns <= 0 means "up to the last event".
JointHistogram window_histogram(EventView ancilla, EventView object, double window_width_ns, WindowAnchor anchor,
                                double duration_ns = 0.0);

}  // namespace xqd
