#pragma once

// Event files and plot-data CSV export.
//
// Binary layout: the 8-byte magic "XQDEVT01" followed by 16-byte
// little-endian records {u64 timestamp_ns, f32 energy_ev, u8 detector_id,
// u8 truth_kind, u16 reserved = 0}. The CSV form has the header
// detector_id,timestamp_ns,energy_ev,truth_kind. Both hold the two
// detectors interleaved in time order.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "xqd/coincidence.hpp"
#include "xqd/events.hpp"
#include "xqd/phasematch.hpp"
#include "xqd/stats.hpp"

namespace xqd {

inline constexpr char kEventMagic[8] = {'X', 'Q', 'D', 'E', 'V', 'T', '0', '1'};
inline constexpr std::size_t kEventRecordBytes = 16;
inline constexpr const char* kEventCsvHeader = "detector_id,timestamp_ns,energy_ev,truth_kind";

enum class EventFormat { Binary, Csv };

/// ".csv" (any case) selects Csv, everything else Binary.
EventFormat format_for_path(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same float.
std::string format_float(float value);

/// Streaming writer. Rejects events whose timestamp regresses relative to
/// the previous event of the same detector (Errc::UnsortedInput).
class EventWriter {
 public:
  EventWriter(const std::filesystem::path& path, EventFormat format);
  EventWriter(std::ostream& out, EventFormat format);

  void write(const DetectionEvent& event);
  void flush();
  std::uint64_t count() const { return count_; }

 private:
  void start();

  std::ofstream file_;
  std::ostream* out_;
  EventFormat format_;
  std::uint64_t count_ = 0;
  std::optional<std::uint64_t> last_[2];
};

/// Streaming reader. next() returns events in file order and throws
/// Errc::BadMagic, TruncatedRecord (with byte offset), CorruptRecord or
/// UnsortedInput.
class EventReader {
 public:
  EventReader(const std::filesystem::path& path, EventFormat format);
  EventReader(std::istream& in, EventFormat format);

  std::optional<DetectionEvent> next();
  /// Bytes consumed so far (binary) or lines read (CSV).
  std::uint64_t position() const { return position_; }

 private:
  void start();
  std::optional<DetectionEvent> next_binary();
  std::optional<DetectionEvent> next_csv();
  void check_order(const DetectionEvent& e);

  std::ifstream file_;
  std::istream* in_;
  EventFormat format_;
  std::uint64_t position_ = 0;
  std::optional<std::uint64_t> last_[2];
};

/// Time-ordered merge of the two streams (ancilla first on ties).
void write_events(const std::filesystem::path& path, const DetectorStreams& streams, EventFormat format);
void write_events(std::ostream& out, const DetectorStreams& streams, EventFormat format);
DetectorStreams read_events(const std::filesystem::path& path, EventFormat format);
DetectorStreams read_events(std::istream& in, EventFormat format);

/// t_ancilla_ns,t_object_ns,e_ancilla_ev,e_object_ev,dt_ns
void write_records_csv(std::ostream& out, const RecordList& records);
/// position_mm,counts,error
void write_image_csv(std::ostream& out, const ScanImage& image);
/// angle_deg,signal_energy_ev,idler_energy_ev,residual (empty fields for
/// unsolved angles, with a trailing status column).
void write_curve_csv(std::ostream& out, const std::vector<phasematch::CurveSample>& curve);

}  // namespace xqd
