#pragma once

// Degree of correlation, image contrast and signal-to-noise.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xqd/coincidence.hpp"

namespace xqd {

/// Var(N_o - N_a) / Mean(N_o + N_a) over windows, population variance.
/// Errc::Degenerate when the mean sum is zero or fewer than 2 windows.
double degree_of_correlation(const JointHistogram& histogram);

enum class ScanMode { A_Quantum, B_ClassicalSingles, C_ClassicalCoincidence };

std::string to_string(ScanMode mode);
/// Accepts "A", "B", "C" (case-insensitive) and the full enum names.
ScanMode parse_scan_mode(const std::string& text);

struct ScanImage {
  std::vector<double> positions_mm;
  std::vector<std::uint64_t> counts;
  std::vector<double> errors;  // sqrt(counts)
  ScanMode mode = ScanMode::A_Quantum;

  static ScanImage from_counts(std::vector<double> positions_mm, std::vector<std::uint64_t> counts, ScanMode mode);
};

struct Partition {
  std::vector<std::size_t> max_positions;
  std::vector<std::size_t> min_positions;
};

/// max = {c >= 0.7 c_max}, min = {c <= 1.3 c_min}. Errc::OverlappingPartition
/// when the two sets intersect; Errc::Degenerate for < 2 positions or an
/// all-zero image.
Partition threshold_partition(const ScanImage& image);

struct Visibility {
  double value = 0.0;
  double error = 0.0;
};

/// (I_max - I_min) / (I_max + I_min) over the partition means, with
/// first-order Poisson error propagation (Var of a mean = mean / set size).
Visibility visibility(const ScanImage& image);

struct Snr {
  /// I_max / I_min; unset when I_min is exactly zero.
  std::optional<double> value;
  double i_max_mean = 0.0;

  bool infinite() const { return !value.has_value(); }
};

Snr snr(const ScanImage& image);

struct StatsReport {
  /// Degree of correlation when a window histogram was analysed.
  std::optional<double> sigma;
  double visibility = 0.0;
  double visibility_error = 0.0;
  Snr snr;
  double i_max_mean = 0.0;
  double i_min_mean = 0.0;
  std::size_t n_max_positions = 0;
  std::size_t n_min_positions = 0;
};

StatsReport image_stats(const ScanImage& image);

}  // namespace xqd
