#pragma once

// JSON run reports with a stable field order.

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "xqd/imaging.hpp"
#include "xqd/stats.hpp"

namespace xqd {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportFormat = "xqd-report/1";

/// format, software version, command, config hash, seed, RNG algorithm.
/// seed is null for commands that draw no random numbers.
Json report_header(const std::string& command, const std::string& config_hash, std::optional<std::uint64_t> seed);

Json to_json(const StatsReport& stats);
Json to_json(const ScanResult& scan);

/// Serialized report. The body is hashed (FNV-1a) into "content_hash"; a
/// "generated_at" UTC timestamp is appended afterwards and is not part of
/// the hash, so identical inputs give identical hashes.
std::string render_report(Json report, bool with_timestamp = true);

/// Body hash of a rendered report (ignores generated_at).
std::string report_content_hash(const Json& report);

}  // namespace xqd
