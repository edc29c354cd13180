#include "xqd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "xqd/error.hpp"

namespace xqd::mc {
namespace {

constexpr std::uint64_t kTruthStream = 1;
constexpr std::uint64_t kDetectStream = 2;

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(Errc::InvalidConfig, message);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

// Appends a homogeneous Poisson process of the given rate on [0, duration).
template <typename Fill>
void poisson_process(std::vector<EmissionTruth>& out, double rate_hz, double duration_ns, Rng& rng, Fill fill) {
  if (rate_hz <= 0.0) return;
  const double mean_gap_ns = kNsPerSecond / rate_hz;
  out.reserve(out.size() + static_cast<std::size_t>(duration_ns / mean_gap_ns * 1.05 + 16));
  for (double t = rng.exponential(mean_gap_ns); t < duration_ns; t += rng.exponential(mean_gap_ns)) {
    EmissionTruth e;
    e.time_ns = t;
    fill(e);
    out.push_back(e);
  }
}

// Same process restricted to disjoint sorted intervals.
template <typename Fill>
void gated_poisson_process(std::vector<EmissionTruth>& out, double rate_hz,
                           const std::vector<std::pair<double, double>>& gates, Rng& rng, Fill fill) {
  if (rate_hz <= 0.0) return;
  const double mean_gap_ns = kNsPerSecond / rate_hz;
  for (const auto& [lo, hi] : gates) {
    for (double t = lo + rng.exponential(mean_gap_ns); t < hi; t += rng.exponential(mean_gap_ns)) {
      EmissionTruth e;
      e.time_ns = t;
      fill(e);
      out.push_back(e);
    }
  }
}

std::vector<std::pair<double, double>> build_gates(const std::vector<EmissionTruth>& a,
                                                   const std::vector<EmissionTruth>& b, const ObjectGate& gate,
                                                   double duration_ns) {
  std::vector<double> anchors;
  anchors.reserve(a.size() + b.size());
  for (const auto& e : a) anchors.push_back(e.time_ns);
  for (const auto& e : b) anchors.push_back(e.time_ns);
  std::sort(anchors.begin(), anchors.end());
  std::vector<std::pair<double, double>> gates;
  for (double t : anchors) {
    const double lo = std::max(0.0, t - gate.before_ns);
    const double hi = std::min(duration_ns, t + gate.after_ns);
    if (!gates.empty() && lo <= gates.back().second) {
      gates.back().second = std::max(gates.back().second, hi);
    } else {
      gates.emplace_back(lo, hi);
    }
  }
  return gates;
}

}  // namespace

// ---------------------------------------------------------------- spectrum

EnergySpectrum::EnergySpectrum() : EnergySpectrum({{9000.0, 13000.0, 1.0}}, {}) {}

EnergySpectrum::EnergySpectrum(std::vector<SpectrumSegment> segments, std::vector<SpectrumLine> lines)
    : segments_(std::move(segments)), lines_(std::move(lines)) {
  rebuild_cdf();
}

EnergySpectrum EnergySpectrum::uniform(double low_ev, double high_ev) {
  return EnergySpectrum({{low_ev, high_ev, 1.0}}, {});
}

EnergySpectrum EnergySpectrum::line(double energy_ev) { return EnergySpectrum({}, {{energy_ev, 1.0}}); }

void EnergySpectrum::rebuild_cdf() {
  cdf_.clear();
  double acc = 0.0;
  for (const auto& s : segments_) cdf_.push_back(acc += s.weight);
  for (const auto& l : lines_) cdf_.push_back(acc += l.weight);
}

void EnergySpectrum::validate() const {
  require(!segments_.empty() || !lines_.empty(), "energy spectrum is empty");
  double total = 0.0;
  for (const auto& s : segments_) {
    require(std::isfinite(s.low_ev) && std::isfinite(s.high_ev) && s.low_ev > 0.0 && s.high_ev > s.low_ev,
            "spectrum segment needs 0 < low < high");
    require(finite_nonneg(s.weight), "spectrum weights must be non-negative");
    total += s.weight;
  }
  for (const auto& l : lines_) {
    require(std::isfinite(l.energy_ev) && l.energy_ev > 0.0, "spectrum line energy must be positive");
    require(finite_nonneg(l.weight), "spectrum weights must be non-negative");
    total += l.weight;
  }
  require(std::abs(total - 1.0) <= 1e-9, "spectrum weights must integrate to 1 (got " + std::to_string(total) + ")");
}

double EnergySpectrum::sample(Rng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  const auto idx = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
  const std::size_t i = std::min(idx, cdf_.size() - 1);
  if (i < segments_.size()) {
    const auto& s = segments_[i];
    return rng.uniform(s.low_ev, s.high_ev);
  }
  return lines_[i - segments_.size()].energy_ev;
}

double EnergySpectrum::mass_between(double low_ev, double high_ev) const {
  double m = 0.0;
  for (const auto& s : segments_) {
    const double overlap = std::min(high_ev, s.high_ev) - std::max(low_ev, s.low_ev);
    if (overlap > 0.0) m += s.weight * overlap / (s.high_ev - s.low_ev);
  }
  for (const auto& l : lines_) {
    if (l.energy_ev >= low_ev && l.energy_ev <= high_ev) m += l.weight;
  }
  return m;
}

double EnergySpectrum::support_low() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& s : segments_) lo = std::min(lo, s.low_ev);
  for (const auto& l : lines_) lo = std::min(lo, l.energy_ev);
  return lo;
}

double EnergySpectrum::support_high() const {
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : segments_) hi = std::max(hi, s.high_ev);
  for (const auto& l : lines_) hi = std::max(hi, l.energy_ev);
  return hi;
}

// ------------------------------------------------------------------ configs

void validate(const SourceConfig& source) {
  require(finite_nonneg(source.pdc_pair_rate_hz), "pdc_pair_rate must be >= 0");
  require(finite_nonneg(source.noise_rate_ancilla_hz), "noise_rate_ancilla must be >= 0");
  require(finite_nonneg(source.noise_rate_object_ambient_hz), "noise_rate_object_ambient must be >= 0");
  require(finite_nonneg(source.noise_rate_object_transmitted_hz), "noise_rate_object_transmitted must be >= 0");
  require(finite_nonneg(source.object_fluorescence_coefficient_hz),
          "object_fluorescence_coefficient must be >= 0");
  require(finite_nonneg(source.run_duration_s), "run_duration must be >= 0");
  source.noise_spectrum.validate();
}

SourceConfig quantum_source_defaults() {
  SourceConfig s;
  s.pdc_pair_rate_hz = 0.0407636;
  s.noise_rate_ancilla_hz = 0.00407636;
  s.noise_rate_object_ambient_hz = 407.636;
  s.noise_rate_object_transmitted_hz = 0.0;
  s.object_fluorescence_coefficient_hz = 0.0;
  s.run_duration_s = 3600.0;
  return s;
}

SourceConfig classical_source_defaults() {
  SourceConfig s;
  s.pdc_pair_rate_hz = 18225.0;
  s.noise_rate_ancilla_hz = 5.67e5;
  s.noise_rate_object_ambient_hz = 2.025e5;
  s.noise_rate_object_transmitted_hz = 3.105e5;
  s.object_fluorescence_coefficient_hz = 6.75e4;
  s.run_duration_s = 1.0;
  return s;
}

void validate(const DetectorConfig& d) {
  require(std::isfinite(d.quantum_efficiency) && d.quantum_efficiency >= 0.0 && d.quantum_efficiency <= 1.0,
          "quantum_efficiency must lie in [0, 1]");
  require(finite_nonneg(d.energy_sigma_ev), "energy_sigma must be >= 0");
  require(finite_nonneg(d.dead_time_ns), "dead_time must be >= 0");
  require(std::isfinite(d.logic_pulse_width_ns) && d.logic_pulse_width_ns > 0.0, "logic_pulse_width must be > 0");
  require(std::isfinite(d.calibration_gain) && d.calibration_gain > 0.0, "calibration_gain must be > 0");
}

void validate(const ObjectGate& gate) {
  require(finite_nonneg(gate.before_ns) && finite_nonneg(gate.after_ns), "object gate widths must be >= 0");
}

ObjectGate coincidence_gate(const DetectorPair& detectors) {
  // +2 ns covers timestamp flooring on both sides.
  return ObjectGate{detectors.object.logic_pulse_width_ns + detectors.object.dead_time_ns + 2.0,
                    detectors.ancilla.logic_pulse_width_ns + 2.0};
}

// ------------------------------------------------------------- pair sampler

PairEnergySampler::PairEnergySampler(double pump_energy_ev, double object_center_ev, double object_width_ev)
    : pump_(pump_energy_ev), center_(object_center_ev), width_(object_width_ev) {
  require(pump_ > 0.0, "pair sampler: pump energy must be positive");
  require(width_ >= 0.0, "pair sampler: band width must be >= 0");
  require(center_ - 0.5 * width_ > 0.0 && center_ + 0.5 * width_ < pump_,
          "pair sampler: object band must lie inside (0, pump)");
}

PairEnergySampler PairEnergySampler::degenerate(double pump_energy_ev) {
  return PairEnergySampler(pump_energy_ev, 0.5 * pump_energy_ev, 0.0);
}

PairEnergySampler PairEnergySampler::from_phase_matching(const phasematch::CrystalGeometry& geometry,
                                                         double angular_acceptance_rad) {
  const auto degenerate = phasematch::degenerate_solution(geometry);
  const auto band = phasematch::predict_spectrum(geometry, degenerate.signal_angle_rad, angular_acceptance_rad);
  return PairEnergySampler(geometry.pump_energy_ev, band.center_ev, band.width_ev);
}

std::pair<double, double> PairEnergySampler::sample(Rng& rng) const {
  const double object = width_ > 0.0 ? rng.uniform(center_ - 0.5 * width_, center_ + 0.5 * width_) : center_;
  return {pump_ - object, object};
}

EnergySpectrum PairEnergySampler::object_spectrum() const {
  if (width_ > 0.0) return EnergySpectrum::uniform(center_ - 0.5 * width_, center_ + 0.5 * width_);
  return EnergySpectrum::line(center_);
}

EnergySpectrum PairEnergySampler::ancilla_spectrum() const {
  const double c = pump_ - center_;
  if (width_ > 0.0) return EnergySpectrum::uniform(c - 0.5 * width_, c + 0.5 * width_);
  return EnergySpectrum::line(c);
}

// ------------------------------------------------------------------- truth

std::vector<EmissionTruth> generate_truth(const SourceConfig& source, double pump_energy_ev,
                                          const PairEnergySampler& pairs, double object_transmission,
                                          std::uint64_t seed, const std::optional<ObjectGate>& gate) {
  validate(source);
  if (gate) validate(*gate);
  require(std::isfinite(object_transmission) && object_transmission >= 0.0 && object_transmission <= 1.0,
          "object_transmission must lie in [0, 1]");
  require(std::abs(pairs.pump_energy_ev() - pump_energy_ev) <= 1e-9 * pump_energy_ev,
          "pair sampler pump energy differs from the source pump energy");

  const double duration_ns = source.run_duration_s * kNsPerSecond;
  auto rng_for = [&](TruthKind kind) { return Rng(derive_seed(seed, kTruthStream, static_cast<std::uint64_t>(kind))); };

  std::vector<std::vector<EmissionTruth>> per_kind(5);

  {
    Rng rng = rng_for(TruthKind::PdcPair);
    poisson_process(per_kind[0], source.pdc_pair_rate_hz, duration_ns, rng, [&](EmissionTruth& e) {
      e.kind = TruthKind::PdcPair;
      const auto [a, o] = pairs.sample(rng);
      e.ancilla_energy_ev = a;
      e.object_energy_ev = o;
      e.transmitted = rng.bernoulli(object_transmission);
    });
  }
  {
    Rng rng = rng_for(TruthKind::AmbientNoiseAncilla);
    poisson_process(per_kind[1], source.noise_rate_ancilla_hz, duration_ns, rng, [&](EmissionTruth& e) {
      e.kind = TruthKind::AmbientNoiseAncilla;
      e.ancilla_energy_ev = source.noise_spectrum.sample(rng);
    });
  }
  std::vector<std::pair<double, double>> gates;
  if (gate) gates = build_gates(per_kind[0], per_kind[1], *gate, duration_ns);
  auto object_process = [&](std::vector<EmissionTruth>& out, double rate, Rng& rng, auto fill) {
    if (gate) {
      gated_poisson_process(out, rate, gates, rng, fill);
    } else {
      poisson_process(out, rate, duration_ns, rng, fill);
    }
  };
  {
    Rng rng = rng_for(TruthKind::AmbientNoiseObject);
    object_process(per_kind[2], source.noise_rate_object_ambient_hz, rng, [&](EmissionTruth& e) {
      e.kind = TruthKind::AmbientNoiseObject;
      e.object_energy_ev = source.noise_spectrum.sample(rng);
    });
  }
  {
    Rng rng = rng_for(TruthKind::ObjectFluorescence);
    const double rate = source.object_fluorescence_coefficient_hz * (1.0 - object_transmission);
    object_process(per_kind[3], rate, rng, [&](EmissionTruth& e) {
      e.kind = TruthKind::ObjectFluorescence;
      e.object_energy_ev = source.noise_spectrum.sample(rng);
    });
  }
  {
    Rng rng = rng_for(TruthKind::TransmittedNoise);
    const double rate = source.noise_rate_object_transmitted_hz * object_transmission;
    object_process(per_kind[4], rate, rng, [&](EmissionTruth& e) {
      e.kind = TruthKind::TransmittedNoise;
      e.object_energy_ev = source.noise_spectrum.sample(rng);
      e.transmitted = true;
    });
  }

  // Stable pairwise merge keeps kind order for (measure-zero) time ties.
  auto by_time = [](const EmissionTruth& a, const EmissionTruth& b) { return a.time_ns < b.time_ns; };
  std::vector<EmissionTruth> merged = std::move(per_kind[0]);
  for (std::size_t k = 1; k < per_kind.size(); ++k) {
    if (per_kind[k].empty()) continue;
    std::vector<EmissionTruth> next;
    next.reserve(merged.size() + per_kind[k].size());
    std::merge(merged.begin(), merged.end(), per_kind[k].begin(), per_kind[k].end(), std::back_inserter(next),
               by_time);
    merged = std::move(next);
  }
  return merged;
}

// ---------------------------------------------------------------- response

void DetectorResponse::Channel::offer(double time_ns, double energy_ev, TruthKind kind, EventStream& out) {
  if (!rng.bernoulli(config.quantum_efficiency)) return;
  const auto ts = static_cast<std::uint64_t>(std::floor(time_ns));
  if (has_last && static_cast<double>(ts - last_ns) < config.dead_time_ns) return;
  has_last = true;
  last_ns = ts;

  double measured = energy_ev;
  if (config.energy_sigma_ev > 0.0) measured += config.energy_sigma_ev * rng.normal();
  measured *= config.calibration_gain;
  // Pulses at or below zero height are not registered (the dead time still applies).
  if (!(measured > 0.0)) return;

  out.push_back(DetectionEvent{ts, static_cast<float>(measured), id, kind});
}

DetectorResponse::DetectorResponse(const DetectorPair& detectors, std::uint64_t seed)
    : ancilla_{detectors.ancilla, DetectorId::Ancilla, Rng(derive_seed(seed, 0)), false, 0},
      object_{detectors.object, DetectorId::Object, Rng(derive_seed(seed, 1)), false, 0} {
  validate(detectors.ancilla);
  validate(detectors.object);
}

void DetectorResponse::process(std::span<const EmissionTruth> truth, double time_offset_ns, DetectorStreams& out) {
  double previous = -std::numeric_limits<double>::infinity();
  for (const auto& e : truth) {
    if (e.time_ns < previous) throw Error(Errc::UnsortedInput, "emission truth is not time-sorted");
    previous = e.time_ns;
    const double t = e.time_ns + time_offset_ns;
    if (t < 0.0) throw Error(Errc::InvalidConfig, "emission times must be non-negative");
    switch (e.kind) {
      case TruthKind::PdcPair:
        if (e.ancilla_energy_ev) ancilla_.offer(t, *e.ancilla_energy_ev, e.kind, out.ancilla);
        if (e.transmitted && e.object_energy_ev) object_.offer(t, *e.object_energy_ev, e.kind, out.object);
        break;
      case TruthKind::AmbientNoiseAncilla:
        if (e.ancilla_energy_ev) ancilla_.offer(t, *e.ancilla_energy_ev, e.kind, out.ancilla);
        break;
      case TruthKind::AmbientNoiseObject:
      case TruthKind::ObjectFluorescence:
      case TruthKind::TransmittedNoise:
        if (e.object_energy_ev) object_.offer(t, *e.object_energy_ev, e.kind, out.object);
        break;
      case TruthKind::None:
        break;
    }
  }
}

DetectorStreams detect(std::span<const EmissionTruth> truth, const DetectorConfig& ancilla,
                       const DetectorConfig& object, std::uint64_t seed) {
  DetectorResponse response(DetectorPair{ancilla, object}, seed);
  DetectorStreams out;
  response.process(truth, 0.0, out);
  return out;
}

double expected_emissions(const SourceConfig& source, double object_transmission,
                          const std::optional<ObjectGate>& gate) {
  const double anchor_rate = source.pdc_pair_rate_hz + source.noise_rate_ancilla_hz;
  const double object_rate = source.noise_rate_object_ambient_hz +
                             source.object_fluorescence_coefficient_hz * (1.0 - object_transmission) +
                             source.noise_rate_object_transmitted_hz * object_transmission;
  if (!gate) return (anchor_rate + object_rate) * source.run_duration_s;
  const double open_fraction =
      std::min(1.0, anchor_rate * (gate->before_ns + gate->after_ns) / kNsPerSecond);
  return (anchor_rate + object_rate * open_fraction) * source.run_duration_s;
}

DetectorStreams acquire(const SourceConfig& source, double pump_energy_ev, const PairEnergySampler& pairs,
                        double object_transmission, const DetectorPair& detectors, std::uint64_t seed,
                        const AcquisitionOptions& options) {
  validate(source);
  require(options.max_emissions_per_shard >= 1.0, "max_emissions_per_shard must be >= 1");
  // Shard layout ignores the gate so gated and full runs share ancilla streams.
  const double full = expected_emissions(source, object_transmission);
  const double expected = expected_emissions(source, object_transmission, options.object_gate);
  const auto shards = static_cast<std::uint64_t>(std::max(1.0, std::ceil(full / options.max_emissions_per_shard)));
  const double shard_s = source.run_duration_s / static_cast<double>(shards);

  SourceConfig shard_source = source;
  shard_source.run_duration_s = shard_s;

  DetectorResponse response(detectors, derive_seed(seed, kDetectStream));
  DetectorStreams out;
  out.ancilla.reserve(static_cast<std::size_t>(
      (source.pdc_pair_rate_hz + source.noise_rate_ancilla_hz) * source.run_duration_s * 1.02 + 64));
  out.object.reserve(static_cast<std::size_t>(expected * 1.02 + 64));
  for (std::uint64_t i = 0; i < shards; ++i) {
    const auto truth = generate_truth(shard_source, pump_energy_ev, pairs, object_transmission,
                                      derive_seed(seed, kTruthStream, i), options.object_gate);
    response.process(truth, static_cast<double>(i) * shard_s * kNsPerSecond, out);
  }
  return out;
}

}  // namespace xqd::mc
