#include "xqd/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "xqd/config.hpp"
#include "xqd/rng.hpp"

#ifndef XQD_VERSION
#define XQD_VERSION "1.0.0"
#endif

namespace xqd {

Json report_header(const std::string& command, const std::string& config_hash, std::optional<std::uint64_t> seed) {
  Json j;
  j["format"] = kReportFormat;
  j["software_version"] = XQD_VERSION;
  j["command"] = command;
  j["config_hash"] = config_hash;
  if (seed) {
    j["seed"] = *seed;
  } else {
    j["seed"] = nullptr;
  }
  j["rng_algorithm"] = std::string(kRngAlgorithm);
  return j;
}

Json to_json(const StatsReport& s) {
  Json j;
  if (s.sigma) j["sigma"] = *s.sigma;
  j["visibility"] = s.visibility;
  j["visibility_error"] = s.visibility_error;
  if (s.snr.infinite()) {
    j["snr"] = "INFINITE";
  } else {
    j["snr"] = *s.snr.value;
  }
  j["i_max_mean"] = s.i_max_mean;
  j["i_min_mean"] = s.i_min_mean;
  j["n_max_positions"] = s.n_max_positions;
  j["n_min_positions"] = s.n_min_positions;
  return j;
}

Json to_json(const ScanResult& r) {
  Json j;
  j["mode"] = to_string(r.image.mode);
  j["acquisition_time_s"] = r.acquisition_time_s;
  Json positions = Json::array();
  for (std::size_t i = 0; i < r.image.counts.size(); ++i) {
    Json p;
    p["position_mm"] = r.image.positions_mm[i];
    p["transmission"] = r.transmissions.at(i);
    p["expected_counts"] = r.expected_counts.at(i);
    p["counts"] = r.image.counts[i];
    p["error"] = r.image.errors[i];
    positions.push_back(std::move(p));
  }
  j["positions"] = std::move(positions);
  return j;
}

std::string report_content_hash(const Json& report) {
  Json body = report;
  body.erase("generated_at");
  body.erase("content_hash");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(body.dump())));
  return buf;
}

std::string render_report(Json report, bool with_timestamp) {
  report.erase("generated_at");
  report["content_hash"] = report_content_hash(report);
  if (with_timestamp) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    report["generated_at"] = buf;
  }
  return report.dump(2) + "\n";
}

}  // namespace xqd
