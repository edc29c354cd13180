#include "xqd/imaging.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "xqd/error.hpp"
#include "xqd/rate_model.hpp"

namespace xqd {
namespace {

constexpr std::uint64_t kScanStream = 3;

bool unit_interval(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

void validate(const ObjectMask& mask) {
  if (!unit_interval(mask.background_transmission)) {
    throw Error(Errc::InvalidConfig, "object: background_transmission must lie in [0, 1]");
  }
  auto slits = mask.slits;
  for (const auto& s : slits) {
    if (!std::isfinite(s.center_mm)) throw Error(Errc::InvalidConfig, "object: slit centre must be finite");
    if (!(std::isfinite(s.width_mm) && s.width_mm > 0.0)) throw Error(Errc::InvalidConfig, "object: slit width must be > 0");
    if (!unit_interval(s.transmission)) throw Error(Errc::InvalidConfig, "object: slit transmission must lie in [0, 1]");
  }
  std::sort(slits.begin(), slits.end(), [](const Slit& a, const Slit& b) { return a.center_mm < b.center_mm; });
  for (std::size_t i = 1; i < slits.size(); ++i) {
    if (slits[i - 1].center_mm + 0.5 * slits[i - 1].width_mm > slits[i].center_mm - 0.5 * slits[i].width_mm) {
      throw Error(Errc::InvalidConfig, "object: slits overlap");
    }
  }
}

double effective_transmission(const ObjectMask& mask, double position_mm, double width_mm) {
  const double bg = mask.background_transmission;
  if (width_mm <= 0.0) {
    for (const auto& s : mask.slits) {
      if (std::abs(position_mm - s.center_mm) <= 0.5 * s.width_mm) return s.transmission;
    }
    return bg;
  }
  const double lo = position_mm - 0.5 * width_mm;
  const double hi = position_mm + 0.5 * width_mm;
  double t = bg;
  for (const auto& s : mask.slits) {
    const double overlap = std::min(hi, s.center_mm + 0.5 * s.width_mm) - std::max(lo, s.center_mm - 0.5 * s.width_mm);
    if (overlap > 0.0) t += (s.transmission - bg) * overlap / width_mm;
  }
  return std::clamp(t, 0.0, 1.0);
}

std::vector<double> ScanConfig::default_positions() {
  std::vector<double> p;
  for (int i = -8; i <= 8; ++i) p.push_back(0.25 * i);
  return p;
}

void validate(const ScanConfig& scan) {
  if (scan.positions_mm.empty()) throw Error(Errc::InvalidConfig, "scan: positions must not be empty");
  for (std::size_t i = 0; i < scan.positions_mm.size(); ++i) {
    if (!std::isfinite(scan.positions_mm[i])) throw Error(Errc::InvalidConfig, "scan: positions must be finite");
    if (i > 0 && !(scan.positions_mm[i] > scan.positions_mm[i - 1])) {
      throw Error(Errc::InvalidConfig, "scan: positions must be strictly increasing");
    }
  }
  if (!(std::isfinite(scan.detector_slit_width_mm) && scan.detector_slit_width_mm >= 0.0)) {
    throw Error(Errc::InvalidConfig, "scan: detector_slit_width must be >= 0");
  }
  if (!(std::isfinite(scan.photon_budget_per_position) && scan.photon_budget_per_position > 0.0)) {
    throw Error(Errc::InvalidConfig, "scan: photon_budget_per_position must be > 0");
  }
}

double solve_acquisition_time(const ObjectMask& mask, const ScanConfig& scan, const mc::SourceConfig& source,
                              const mc::PairEnergySampler& pairs, const mc::DetectorPair& detectors,
                              const FilterConfig& filters) {
  const mc::RateModel model(source, pairs, detectors, filters);
  double sum = 0.0;
  double peak = 0.0;
  for (double p : scan.positions_mm) {
    const double t = effective_transmission(mask, p, scan.detector_slit_width_mm);
    const double r = model.mode_rate(scan.mode, t, scan.band_in_mode_c).total_hz();
    sum += r;
    peak = std::max(peak, r);
  }
  const double reference =
      scan.budget_normalization == BudgetNormalization::Mean ? sum / static_cast<double>(scan.positions_mm.size()) : peak;
  if (!(reference > 0.0)) {
    throw Error(Errc::InvalidConfig, "scan: the mode-relevant count rate is zero at every position");
  }
  return scan.photon_budget_per_position / reference;
}

std::uint64_t count_mode_events(const DetectorStreams& streams, ScanMode mode, const mc::DetectorPair& detectors,
                                const FilterConfig& filters, bool band_in_mode_c) {
  if (mode == ScanMode::B_ClassicalSingles) {
    return static_cast<std::uint64_t>(std::count_if(streams.object.begin(), streams.object.end(),
                                                    [&](const DetectionEvent& e) { return filters.in_band(e.energy_ev); }));
  }
  const auto records = and_gate_match(streams.ancilla, streams.object, detectors.ancilla.logic_pulse_width_ns,
                                      detectors.object.logic_pulse_width_ns);
  if (mode == ScanMode::A_Quantum) return quantum_select(records, filters).size();
  return classical_coincidence_select(records, filters, band_in_mode_c).size();
}

ScanResult run_scan(const ObjectMask& mask, const ScanConfig& scan, const mc::SourceConfig& source,
                    const mc::PairEnergySampler& pairs, const mc::DetectorPair& detectors,
                    const FilterConfig& filters, std::uint64_t seed, const ScanOptions& options) {
  validate(mask);
  validate(scan);
  validate(filters);
  mc::validate(source);

  ScanResult result;
  result.acquisition_time_s = solve_acquisition_time(mask, scan, source, pairs, detectors, filters);
  const mc::RateModel model(source, pairs, detectors, filters);
  const std::size_t n = scan.positions_mm.size();
  for (double p : scan.positions_mm) {
    const double t = effective_transmission(mask, p, scan.detector_slit_width_mm);
    result.transmissions.push_back(t);
    result.expected_counts.push_back(model.mode_rate(scan.mode, t, scan.band_in_mode_c).total_hz() *
                                     result.acquisition_time_s);
  }

  mc::SourceConfig run_source = source;
  run_source.run_duration_s = result.acquisition_time_s;

  mc::AcquisitionOptions acquisition = options.acquisition;
  if (options.gate_coincidence_modes && scan.mode != ScanMode::B_ClassicalSingles && !acquisition.object_gate) {
    acquisition.object_gate = mc::coincidence_gate(detectors);
  }

  std::vector<std::uint64_t> counts(n, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const auto streams = mc::acquire(run_source, pairs.pump_energy_ev(), pairs, result.transmissions[i], detectors,
                                         derive_seed(seed, kScanStream, i), acquisition);
        counts[i] = count_mode_events(streams, scan.mode, detectors, filters, scan.band_in_mode_c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  result.image = ScanImage::from_counts(scan.positions_mm, std::move(counts), scan.mode);
  return result;
}

}  // namespace xqd
