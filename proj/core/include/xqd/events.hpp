#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace xqd {

enum class DetectorId : std::uint8_t { Ancilla = 0, Object = 1 };

/// Simulation truth attached to each event. None marks external data.
enum class TruthKind : std::uint8_t {
  None = 0,
  PdcPair = 1,
  AmbientNoiseAncilla = 2,
  AmbientNoiseObject = 3,
  ObjectFluorescence = 4,
  TransmittedNoise = 5,
};

std::string_view to_string(DetectorId id) noexcept;
std::string_view to_string(TruthKind kind) noexcept;
bool is_valid_truth_kind(std::uint8_t raw) noexcept;

/// One detector hit. Layout matches the 16-byte record of the binary
/// event file, with energy kept in single precision so file round trips
/// are exact.
struct DetectionEvent {
  std::uint64_t timestamp_ns = 0;
  float energy_ev = 0.0f;
  DetectorId detector = DetectorId::Ancilla;
  TruthKind truth = TruthKind::None;

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

using EventStream = std::vector<DetectionEvent>;
using EventView = std::span<const DetectionEvent>;

struct DetectorStreams {
  EventStream ancilla;
  EventStream object;
};

}  // namespace xqd
