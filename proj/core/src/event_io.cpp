#include "xqd/event_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <string_view>

#include "xqd/error.hpp"

namespace xqd {

std::string_view to_string(DetectorId id) noexcept {
  switch (id) {
    case DetectorId::Ancilla: return "ancilla";
    case DetectorId::Object: return "object";
  }
  return "unknown";
}

std::string_view to_string(TruthKind kind) noexcept {
  switch (kind) {
    case TruthKind::None: return "None";
    case TruthKind::PdcPair: return "PdcPair";
    case TruthKind::AmbientNoiseAncilla: return "AmbientNoiseAncilla";
    case TruthKind::AmbientNoiseObject: return "AmbientNoiseObject";
    case TruthKind::ObjectFluorescence: return "ObjectFluorescence";
    case TruthKind::TransmittedNoise: return "TransmittedNoise";
  }
  return "unknown";
}

bool is_valid_truth_kind(std::uint8_t raw) noexcept { return raw <= static_cast<std::uint8_t>(TruthKind::TransmittedNoise); }

namespace {

void put_le(unsigned char* p, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void check_event(const DetectionEvent& e, const std::string& where) {
  if (static_cast<std::uint8_t>(e.detector) > 1) throw Error(Errc::CorruptRecord, where + ": detector_id must be 0 or 1");
  if (!is_valid_truth_kind(static_cast<std::uint8_t>(e.truth))) {
    throw Error(Errc::CorruptRecord, where + ": unknown truth_kind " + std::to_string(static_cast<int>(e.truth)));
  }
  if (!(std::isfinite(e.energy_ev) && e.energy_ev > 0.0f)) {
    throw Error(Errc::CorruptRecord, where + ": energy must be finite and positive");
  }
}

template <typename T>
T parse_number(std::string_view text, const std::string& where, const char* field) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(Errc::CorruptRecord, where + ": cannot parse " + field + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

EventFormat format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? EventFormat::Csv : EventFormat::Binary;
}

std::string format_float(float value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), ptr);
}

// ------------------------------------------------------------------ writer

EventWriter::EventWriter(const std::filesystem::path& path, EventFormat format)
    : file_(path, std::ios::binary | std::ios::trunc), out_(&file_), format_(format) {
  if (!file_) throw Error(Errc::Io, "cannot open '" + path.string() + "' for writing");
  start();
}

EventWriter::EventWriter(std::ostream& out, EventFormat format) : out_(&out), format_(format) { start(); }

void EventWriter::start() {
  if (format_ == EventFormat::Binary) {
    out_->write(kEventMagic, sizeof kEventMagic);
  } else {
    *out_ << kEventCsvHeader << '\n';
  }
}

void EventWriter::write(const DetectionEvent& e) {
  check_event(e, "event " + std::to_string(count_));
  auto& last = last_[static_cast<std::uint8_t>(e.detector)];
  if (last && e.timestamp_ns < *last) {
    throw Error(Errc::UnsortedInput, "event " + std::to_string(count_) + ": " + std::string(to_string(e.detector)) +
                                         " timestamp regresses");
  }
  last = e.timestamp_ns;
  if (format_ == EventFormat::Binary) {
    std::array<unsigned char, kEventRecordBytes> rec{};
    put_le(rec.data(), e.timestamp_ns, 8);
    put_le(rec.data() + 8, std::bit_cast<std::uint32_t>(e.energy_ev), 4);
    rec[12] = static_cast<unsigned char>(e.detector);
    rec[13] = static_cast<unsigned char>(e.truth);
    out_->write(reinterpret_cast<const char*>(rec.data()), rec.size());
  } else {
    *out_ << static_cast<int>(e.detector) << ',' << e.timestamp_ns << ',' << format_float(e.energy_ev) << ','
          << static_cast<int>(e.truth) << '\n';
  }
  if (!*out_) throw Error(Errc::Io, "write failed at event " + std::to_string(count_));
  ++count_;
}

void EventWriter::flush() {
  out_->flush();
  if (!*out_) throw Error(Errc::Io, "flush failed");
}

// ------------------------------------------------------------------ reader

EventReader::EventReader(const std::filesystem::path& path, EventFormat format)
    : file_(path, std::ios::binary), in_(&file_), format_(format) {
  if (!file_) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  start();
}

EventReader::EventReader(std::istream& in, EventFormat format) : in_(&in), format_(format) { start(); }

void EventReader::start() {
  if (format_ == EventFormat::Binary) {
    char magic[sizeof kEventMagic] = {};
    in_->read(magic, sizeof magic);
    if (in_->gcount() != static_cast<std::streamsize>(sizeof magic) ||
        std::memcmp(magic, kEventMagic, sizeof magic) != 0) {
      throw Error(Errc::BadMagic, "not an XQDEVT01 event file");
    }
    position_ = sizeof magic;
  } else {
    std::string header;
    if (!std::getline(*in_, header)) throw Error(Errc::BadMagic, "missing CSV header");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != kEventCsvHeader) {
      throw Error(Errc::BadMagic, "unexpected CSV header '" + header + "' (expected " + kEventCsvHeader + ")");
    }
    position_ = 1;
  }
}

void EventReader::check_order(const DetectionEvent& e) {
  auto& last = last_[static_cast<std::uint8_t>(e.detector)];
  if (last && e.timestamp_ns < *last) {
    throw Error(Errc::UnsortedInput, std::string(to_string(e.detector)) + " timestamp regresses near position " +
                                         std::to_string(position_));
  }
  last = e.timestamp_ns;
}

std::optional<DetectionEvent> EventReader::next() {
  return format_ == EventFormat::Binary ? next_binary() : next_csv();
}

std::optional<DetectionEvent> EventReader::next_binary() {
  std::array<unsigned char, kEventRecordBytes> rec{};
  in_->read(reinterpret_cast<char*>(rec.data()), rec.size());
  const auto got = static_cast<std::size_t>(in_->gcount());
  if (got == 0) return std::nullopt;
  const std::string where = "record at byte offset " + std::to_string(position_);
  if (got < rec.size()) {
    throw Error(Errc::TruncatedRecord, where + ": only " + std::to_string(got) + " of 16 bytes present");
  }
  if (rec[12] > 1) throw Error(Errc::CorruptRecord, where + ": detector_id must be 0 or 1");
  if (!is_valid_truth_kind(rec[13])) throw Error(Errc::CorruptRecord, where + ": unknown truth_kind");
  if (rec[14] != 0 || rec[15] != 0) throw Error(Errc::CorruptRecord, where + ": reserved bytes are not zero");
  DetectionEvent e;
  e.timestamp_ns = get_le(rec.data(), 8);
  e.energy_ev = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(rec.data() + 8, 4)));
  e.detector = static_cast<DetectorId>(rec[12]);
  e.truth = static_cast<TruthKind>(rec[13]);
  check_event(e, where);
  check_order(e);
  position_ += rec.size();
  return e;
}

std::optional<DetectionEvent> EventReader::next_csv() {
  std::string line;
  while (std::getline(*in_, line)) {
    ++position_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(position_);
    std::array<std::string_view, 4> f;
    std::string_view rest(line);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto comma = rest.find(',');
      if (i + 1 < f.size()) {
        if (comma == std::string_view::npos) throw Error(Errc::CorruptRecord, where + ": expected 4 fields");
        f[i] = rest.substr(0, comma);
        rest.remove_prefix(comma + 1);
      } else {
        if (comma != std::string_view::npos) throw Error(Errc::CorruptRecord, where + ": expected 4 fields");
        f[i] = rest;
      }
    }
    const auto det = parse_number<unsigned>(f[0], where, "detector_id");
    const auto truth = parse_number<unsigned>(f[3], where, "truth_kind");
    if (det > 1) throw Error(Errc::CorruptRecord, where + ": detector_id must be 0 or 1");
    if (truth > 255 || !is_valid_truth_kind(static_cast<std::uint8_t>(truth))) {
      throw Error(Errc::CorruptRecord, where + ": unknown truth_kind");
    }
    DetectionEvent e;
    e.detector = static_cast<DetectorId>(det);
    e.timestamp_ns = parse_number<std::uint64_t>(f[1], where, "timestamp_ns");
    e.energy_ev = parse_number<float>(f[2], where, "energy_ev");
    e.truth = static_cast<TruthKind>(truth);
    check_event(e, where);
    check_order(e);
    return e;
  }
  return std::nullopt;
}

// -------------------------------------------------------------- whole-file

void write_events(std::ostream& out, const DetectorStreams& streams, EventFormat format) {
  EventWriter writer(out, format);
  std::size_t ia = 0;
  std::size_t io = 0;
  const auto& a = streams.ancilla;
  const auto& o = streams.object;
  while (ia < a.size() || io < o.size()) {
    const bool take_a = io >= o.size() || (ia < a.size() && a[ia].timestamp_ns <= o[io].timestamp_ns);
    writer.write(take_a ? a[ia++] : o[io++]);
  }
  writer.flush();
}

void write_events(const std::filesystem::path& path, const DetectorStreams& streams, EventFormat format) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(Errc::Io, "cannot open '" + path.string() + "' for writing");
  write_events(file, streams, format);
}

DetectorStreams read_events(std::istream& in, EventFormat format) {
  EventReader reader(in, format);
  DetectorStreams s;
  while (auto e = reader.next()) {
    (e->detector == DetectorId::Ancilla ? s.ancilla : s.object).push_back(*e);
  }
  return s;
}

DetectorStreams read_events(const std::filesystem::path& path, EventFormat format) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  return read_events(file, format);
}

// ---------------------------------------------------------------- plot CSV

void write_records_csv(std::ostream& out, const RecordList& records) {
  out << "t_ancilla_ns,t_object_ns,e_ancilla_ev,e_object_ev,dt_ns\n";
  for (const auto& r : records) {
    out << r.ancilla.timestamp_ns << ',' << r.object.timestamp_ns << ',' << format_float(r.ancilla.energy_ev) << ','
        << format_float(r.object.energy_ev) << ',' << r.time_difference_ns << '\n';
  }
}

void write_image_csv(std::ostream& out, const ScanImage& image) {
  out << "position_mm,counts,error\n";
  char buf[64];
  for (std::size_t i = 0; i < image.counts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g,%llu,%.6g", image.positions_mm[i],
                  static_cast<unsigned long long>(image.counts[i]), image.errors[i]);
    out << buf << '\n';
  }
}

void write_curve_csv(std::ostream& out, const std::vector<phasematch::CurveSample>& curve) {
  out << "angle_deg,signal_energy_ev,idler_energy_ev,residual,status\n";
  char buf[160];
  for (const auto& s : curve) {
    if (s.solution) {
      std::snprintf(buf, sizeof buf, "%.9f,%.6f,%.6f,%.3e,ok", rad_to_deg(s.detector_angle_rad),
                    s.solution->signal_energy_ev, s.solution->idler_energy_ev, s.solution->momentum_residual);
    } else {
      std::snprintf(buf, sizeof buf, "%.9f,,,,NO_SOLUTION", rad_to_deg(s.detector_angle_rad));
    }
    out << buf << '\n';
  }
}

}  // namespace xqd
