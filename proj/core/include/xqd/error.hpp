#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xqd {

/// Failure categories surfaced by the library. Each maps to one of the
/// documented error names so callers (and the CLI) can branch on them.
enum class Errc {
  Unsolvable,            // Bragg condition cannot be met
  NoSolution,            // phase-matching root find failed
  InvalidConfig,         // a module invariant is violated
  UnsortedInput,         // timestamps regress in a stream
  EmptyResult,           // a post-selection removed everything
  Degenerate,            // statistic undefined (e.g. zero mean)
  OverlappingPartition,  // image too flat for the 30% rule
  Parse,                 // config file syntax
  Validation,            // config semantics (unknown key, bad value)
  BadMagic,              // event file header
  TruncatedRecord,       // event file ends mid-record
  CorruptRecord,         // reserved bits set / bad enum value
  Io,                    // filesystem errors
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::Unsolvable: return "UNSOLVABLE";
    case Errc::NoSolution: return "NO_SOLUTION";
    case Errc::InvalidConfig: return "INVALID_CONFIG";
    case Errc::UnsortedInput: return "UNSORTED_INPUT";
    case Errc::EmptyResult: return "EMPTY_RESULT";
    case Errc::Degenerate: return "DEGENERATE";
    case Errc::OverlappingPartition: return "OVERLAPPING_PARTITION";
    case Errc::Parse: return "PARSE";
    case Errc::Validation: return "VALIDATION";
    case Errc::BadMagic: return "BAD_MAGIC";
    case Errc::TruncatedRecord: return "TRUNCATED_RECORD";
    case Errc::CorruptRecord: return "CORRUPT_RECORD";
    case Errc::Io: return "IO";
  }
  return "UNKNOWN";
}

}  // namespace xqd
