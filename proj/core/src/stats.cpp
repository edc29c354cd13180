#include "xqd/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "xqd/error.hpp"

namespace xqd {

double degree_of_correlation(const JointHistogram& h) {
  if (h.total_windows < 2) throw Error(Errc::Degenerate, "degree of correlation needs at least 2 windows");
  long double n = 0;
  long double sum_s = 0;
  long double sum_d = 0;
  long double sum_d2 = 0;
  for (const auto& [cell, count] : h.counts) {
    const long double c = count;
    const long double s = static_cast<long double>(cell.first) + cell.second;
    const long double d = static_cast<long double>(cell.second) - static_cast<long double>(cell.first);
    n += c;
    sum_s += c * s;
    sum_d += c * d;
    sum_d2 += c * d * d;
  }
  const long double mean_sum = sum_s / n;
  if (mean_sum <= 0) throw Error(Errc::Degenerate, "degree of correlation: mean photon-number sum is zero");
  const long double mean_d = sum_d / n;
  long double var_d = sum_d2 / n - mean_d * mean_d;
  if (var_d < 0) var_d = 0;
  return static_cast<double>(var_d / mean_sum);
}

std::string to_string(ScanMode mode) {
  switch (mode) {
    case ScanMode::A_Quantum: return "A_Quantum";
    case ScanMode::B_ClassicalSingles: return "B_ClassicalSingles";
    case ScanMode::C_ClassicalCoincidence: return "C_ClassicalCoincidence";
  }
  return "unknown";
}

ScanMode parse_scan_mode(const std::string& text) {
  std::string t;
  for (char c : text) t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (t == "A" || t == "A_QUANTUM") return ScanMode::A_Quantum;
  if (t == "B" || t == "B_CLASSICALSINGLES") return ScanMode::B_ClassicalSingles;
  if (t == "C" || t == "C_CLASSICALCOINCIDENCE") return ScanMode::C_ClassicalCoincidence;
  throw Error(Errc::Validation, "unknown scan mode '" + text + "' (expected A, B or C)");
}

ScanImage ScanImage::from_counts(std::vector<double> positions_mm, std::vector<std::uint64_t> counts, ScanMode mode) {
  if (positions_mm.size() != counts.size()) {
    throw Error(Errc::InvalidConfig, "scan image: positions and counts differ in length");
  }
  ScanImage img;
  img.positions_mm = std::move(positions_mm);
  img.counts = std::move(counts);
  img.errors.reserve(img.counts.size());
  for (auto c : img.counts) img.errors.push_back(std::sqrt(static_cast<double>(c)));
  img.mode = mode;
  return img;
}

Partition threshold_partition(const ScanImage& image) {
  const auto& c = image.counts;
  if (c.size() < 2) throw Error(Errc::Degenerate, "threshold partition needs at least 2 positions");
  const auto c_max = static_cast<double>(*std::max_element(c.begin(), c.end()));
  const auto c_min = static_cast<double>(*std::min_element(c.begin(), c.end()));
  if (c_max <= 0.0) throw Error(Errc::Degenerate, "threshold partition: image has no counts");

  Partition p;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto v = static_cast<double>(c[i]);
    const bool is_max = v >= 0.7 * c_max;
    const bool is_min = v <= 1.3 * c_min;
    if (is_max && is_min) {
      throw Error(Errc::OverlappingPartition,
                  "threshold partition: position " + std::to_string(i) + " is both a maximum and a minimum");
    }
    if (is_max) p.max_positions.push_back(i);
    if (is_min) p.min_positions.push_back(i);
  }
  return p;
}

namespace {

double mean_over(const ScanImage& image, const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (auto i : idx) s += static_cast<double>(image.counts[i]);
  return s / static_cast<double>(idx.size());
}

}  // namespace

Visibility visibility(const ScanImage& image) {
  const auto p = threshold_partition(image);
  const double hi = mean_over(image, p.max_positions);
  const double lo = mean_over(image, p.min_positions);
  const double total = hi + lo;
  Visibility v;
  v.value = (hi - lo) / total;
  // dv/dhi = 2 lo / total^2, dv/dlo = -2 hi / total^2.
  const double var_hi = hi / static_cast<double>(p.max_positions.size());
  const double var_lo = lo / static_cast<double>(p.min_positions.size());
  v.error = 2.0 / (total * total) * std::sqrt(lo * lo * var_hi + hi * hi * var_lo);
  return v;
}

Snr snr(const ScanImage& image) {
  const auto p = threshold_partition(image);
  Snr s;
  s.i_max_mean = mean_over(image, p.max_positions);
  const double lo = mean_over(image, p.min_positions);
  if (lo > 0.0) s.value = s.i_max_mean / lo;
  return s;
}

StatsReport image_stats(const ScanImage& image) {
  const auto p = threshold_partition(image);
  StatsReport r;
  const auto v = visibility(image);
  r.visibility = v.value;
  r.visibility_error = v.error;
  r.snr = snr(image);
  r.i_max_mean = mean_over(image, p.max_positions);
  r.i_min_mean = mean_over(image, p.min_positions);
  r.n_max_positions = p.max_positions.size();
  r.n_min_positions = p.min_positions.size();
  return r;
}

}  // namespace xqd
