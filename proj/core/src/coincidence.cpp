#include "xqd/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xqd/error.hpp"

namespace xqd {

void require_sorted(EventView stream, const char* label) {
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (stream[i].timestamp_ns < stream[i - 1].timestamp_ns) {
      throw Error(Errc::UnsortedInput, std::string(label) + " stream: timestamp regresses at index " +
                                           std::to_string(i) + " (" + std::to_string(stream[i].timestamp_ns) +
                                           " < " + std::to_string(stream[i - 1].timestamp_ns) + ")");
    }
  }
}

RecordList and_gate_match(EventView ancilla, EventView object, double pulse_width_ns) {
  return and_gate_match(ancilla, object, pulse_width_ns, pulse_width_ns);
}

RecordList and_gate_match(EventView ancilla, EventView object, double ancilla_width_ns, double object_width_ns) {
  if (!(ancilla_width_ns > 0.0) || !(object_width_ns > 0.0)) {
    throw Error(Errc::InvalidConfig, "and_gate_match: pulse widths must be positive");
  }
  require_sorted(ancilla, "ancilla");
  require_sorted(object, "object");

  RecordList out;
  std::size_t lo = 0;
  for (const auto& a : ancilla) {
    const auto ta = static_cast<double>(a.timestamp_ns);
    while (lo < object.size() && static_cast<double>(object[lo].timestamp_ns) - ta <= -object_width_ns) ++lo;
    for (std::size_t j = lo; j < object.size(); ++j) {
      const auto dt = static_cast<std::int64_t>(object[j].timestamp_ns - a.timestamp_ns);
      if (static_cast<double>(dt) >= ancilla_width_ns) break;
      out.push_back(CoincidenceRecord{a, object[j], dt});
    }
  }
  return out;
}

RecordList time_cut(const RecordList& records, double max_abs_difference_ns) {
  RecordList out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (std::abs(static_cast<double>(r.time_difference_ns)) <= max_abs_difference_ns) out.push_back(r);
  }
  return out;
}

std::uint64_t JointHistogram::at(std::uint32_t n_ancilla, std::uint32_t n_object) const {
  const auto it = counts.find({n_ancilla, n_object});
  return it == counts.end() ? 0 : it->second;
}

double JointHistogram::probability(std::uint32_t n_ancilla, std::uint32_t n_object) const {
  return total_windows == 0 ? 0.0 : static_cast<double>(at(n_ancilla, n_object)) / static_cast<double>(total_windows);
}

void JointHistogram::merge(const JointHistogram& other) {
  if (total_windows > 0 && other.total_windows > 0 && window_width_ns != other.window_width_ns) {
    throw Error(Errc::InvalidConfig, "cannot merge histograms with different window widths");
  }
  if (total_windows == 0) window_width_ns = other.window_width_ns;
  for (const auto& [cell, n] : other.counts) counts[cell] += n;
  total_windows += other.total_windows;
}

namespace {

JointHistogram triggered_histogram(EventView ancilla, EventView object, double width) {
  JointHistogram h;
  h.window_width_ns = width;
  std::size_t ia = 0;
  std::size_t io = 0;
  while (ia < ancilla.size()) {
    const auto start = static_cast<double>(ancilla[ia].timestamp_ns);
    const double end = start + width;
    std::uint32_t na = 0;
    while (ia < ancilla.size() && static_cast<double>(ancilla[ia].timestamp_ns) < end) {
      ++na;
      ++ia;
    }
    while (io < object.size() && static_cast<double>(object[io].timestamp_ns) < start) ++io;
    std::uint32_t no = 0;
    while (io < object.size() && static_cast<double>(object[io].timestamp_ns) < end) {
      ++no;
      ++io;
    }
    ++h.counts[{na, no}];
    ++h.total_windows;
  }
  return h;
}

JointHistogram clocked_histogram(EventView ancilla, EventView object, double width, double duration) {
  JointHistogram h;
  h.window_width_ns = width;
  if (duration <= 0.0) {
    std::uint64_t last = 0;
    bool any = false;
    if (!ancilla.empty()) last = std::max(last, ancilla.back().timestamp_ns), any = true;
    if (!object.empty()) last = std::max(last, object.back().timestamp_ns), any = true;
    if (!any) return h;
    duration = static_cast<double>(last) + 1.0;
  }
  const auto n_windows = static_cast<std::uint64_t>(std::ceil(duration / width));
  for (EventView s : {ancilla, object}) {
    if (!s.empty() && static_cast<double>(s.back().timestamp_ns) >= duration) {
      throw Error(Errc::InvalidConfig, "window_histogram: events beyond the run duration");
    }
  }

  auto window_of = [width](const DetectionEvent& e) {
    return static_cast<std::uint64_t>(std::floor(static_cast<double>(e.timestamp_ns) / width));
  };

  std::uint64_t nonempty = 0;
  std::size_t ia = 0;
  std::size_t io = 0;
  while (ia < ancilla.size() || io < object.size()) {
    std::uint64_t k = UINT64_MAX;
    if (ia < ancilla.size()) k = window_of(ancilla[ia]);
    if (io < object.size()) k = std::min(k, window_of(object[io]));
    std::uint32_t na = 0;
    std::uint32_t no = 0;
    while (ia < ancilla.size() && window_of(ancilla[ia]) == k) ++na, ++ia;
    while (io < object.size() && window_of(object[io]) == k) ++no, ++io;
    ++h.counts[{na, no}];
    ++nonempty;
  }
  if (n_windows > nonempty) h.counts[{0, 0}] += n_windows - nonempty;
  h.total_windows = std::max(n_windows, nonempty);
  return h;
}

}  // namespace

JointHistogram window_histogram(EventView ancilla, EventView object, double window_width_ns, WindowAnchor anchor,
                                double duration_ns) {
  if (!(window_width_ns > 0.0)) throw Error(Errc::InvalidConfig, "window_histogram: width must be positive");
  require_sorted(ancilla, "ancilla");
  require_sorted(object, "object");
  if (anchor == WindowAnchor::AncillaTriggered) return triggered_histogram(ancilla, object, window_width_ns);
  return clocked_histogram(ancilla, object, window_width_ns, duration_ns);
}

}  // namespace xqd
