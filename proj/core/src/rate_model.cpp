#include "xqd/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "xqd/error.hpp"

namespace xqd::mc {
namespace {

constexpr double kBinEv = 1.0;
constexpr int kPairNodes = 64;

double phi(double x) { return 0.3989422804014327 * std::exp(-0.5 * x * x); }
double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
// Antiderivative of the normal CDF.
double cdf_integral(double x) { return x * cdf(x) + phi(x); }

/// P(mean + sd Z in [a, b]).
double normal_interval(double mean, double sd, double a, double b) {
  if (b <= a) return 0.0;
  if (sd <= 0.0) return (mean >= a && mean <= b) ? 1.0 : 0.0;
  return std::max(0.0, cdf((b - mean) / sd) - cdf((a - mean) / sd));
}

}  // namespace

double smeared_window_probability(const EnergySpectrum& spectrum, double sigma_ev, double gain, double low_ev,
                                  double high_ev) {
  if (high_ev <= low_ev) return 0.0;
  const double a = low_ev / gain;
  const double b = high_ev / gain;
  double p = 0.0;
  for (const auto& s : spectrum.segments()) {
    const double width = s.high_ev - s.low_ev;
    double frac;
    if (sigma_ev <= 0.0) {
      frac = std::max(0.0, std::min(b, s.high_ev) - std::max(a, s.low_ev)) / width;
    } else {
      const double sg = sigma_ev;
      frac = sg / width *
             (cdf_integral((b - s.low_ev) / sg) - cdf_integral((b - s.high_ev) / sg) -
              cdf_integral((a - s.low_ev) / sg) + cdf_integral((a - s.high_ev) / sg));
    }
    p += s.weight * std::clamp(frac, 0.0, 1.0);
  }
  for (const auto& l : spectrum.lines()) p += l.weight * normal_interval(l.energy_ev, sigma_ev, a, b);
  return std::clamp(p, 0.0, 1.0);
}

double coincidence_window_ns(double pulse_width_ns, double time_cut_ns) {
  if (time_cut_ns < 0.0 || pulse_width_ns <= 0.0) return 0.0;
  const double m = std::min(std::floor(time_cut_ns), std::ceil(pulse_width_ns) - 1.0);
  return m < 0.0 ? 0.0 : 2.0 * m + 1.0;
}

RateModel::RateModel(const SourceConfig& source, const PairEnergySampler& pairs, const DetectorPair& detectors,
                     const FilterConfig& filters)
    : source_(source), pairs_(pairs), detectors_(detectors), filters_(filters) {
  validate(source_);
  validate(detectors_.ancilla);
  validate(detectors_.object);
  validate(filters_);
  // Accepted integer differences run from -(half width on the object side)
  // to +(half width on the ancilla side), zero included.
  const double after = 0.5 * (coincidence_window_ns(detectors_.ancilla.logic_pulse_width_ns, filters_.time_cut_ns) - 1.0);
  const double before = 0.5 * (coincidence_window_ns(detectors_.object.logic_pulse_width_ns, filters_.time_cut_ns) - 1.0);
  window_ns_ = after + before + 1.0;
}

std::vector<RateModel::Component> RateModel::ancilla_components() const {
  return {
      {source_.pdc_pair_rate_hz, pairs_.ancilla_spectrum()},
      {source_.noise_rate_ancilla_hz, source_.noise_spectrum},
  };
}

std::vector<RateModel::Component> RateModel::object_components(double t) const {
  return {
      {source_.pdc_pair_rate_hz * t, pairs_.object_spectrum()},
      {source_.noise_rate_object_ambient_hz, source_.noise_spectrum},
      {source_.object_fluorescence_coefficient_hz * (1.0 - t), source_.noise_spectrum},
      {source_.noise_rate_object_transmitted_hz * t, source_.noise_spectrum},
  };
}

double RateModel::ancilla_live_fraction() const {
  double r = 0.0;
  for (const auto& c : ancilla_components()) r += c.rate_hz;
  r *= detectors_.ancilla.quantum_efficiency;
  return 1.0 / (1.0 + r * detectors_.ancilla.dead_time_ns / kNsPerSecond);
}

double RateModel::object_live_fraction(double t) const {
  double r = 0.0;
  for (const auto& c : object_components(t)) r += c.rate_hz;
  r *= detectors_.object.quantum_efficiency;
  return 1.0 / (1.0 + r * detectors_.object.dead_time_ns / kNsPerSecond);
}

double RateModel::ancilla_singles_hz(bool band_only) const {
  const auto& d = detectors_.ancilla;
  double r = 0.0;
  for (const auto& c : ancilla_components()) {
    const double p = band_only ? smeared_window_probability(c.spectrum, d.energy_sigma_ev, d.calibration_gain,
                                                            filters_.band_low(), filters_.band_high())
                               : 1.0;
    r += c.rate_hz * p;
  }
  return r * d.quantum_efficiency * ancilla_live_fraction();
}

double RateModel::object_singles_hz(double t, bool band_only) const {
  const auto& d = detectors_.object;
  double r = 0.0;
  for (const auto& c : object_components(t)) {
    if (c.rate_hz <= 0.0) continue;
    const double p = band_only ? smeared_window_probability(c.spectrum, d.energy_sigma_ev, d.calibration_gain,
                                                            filters_.band_low(), filters_.band_high())
                               : 1.0;
    r += c.rate_hz * p;
  }
  return r * d.quantum_efficiency * object_live_fraction(t);
}

double RateModel::accidental_pass(const EnergySpectrum& ancilla, const EnergySpectrum& object, bool energy_sum) const {
  const auto& da = detectors_.ancilla;
  const auto& dob = detectors_.object;
  const double lo = filters_.band_low();
  const double hi = filters_.band_high();
  if (!energy_sum) {
    return smeared_window_probability(ancilla, da.energy_sigma_ev, da.calibration_gain, lo, hi) *
           smeared_window_probability(object, dob.energy_sigma_ev, dob.calibration_gain, lo, hi);
  }

  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / kBinEv));
  const double h = (hi - lo) / static_cast<double>(n);
  std::vector<double> pa(n);
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double x0 = lo + h * static_cast<double>(k);
    pa[k] = smeared_window_probability(ancilla, da.energy_sigma_ev, da.calibration_gain, x0, x0 + h);
    prefix[k + 1] = prefix[k] +
                    smeared_window_probability(object, dob.energy_sigma_ev, dob.calibration_gain, x0, x0 + h);
  }
  const double pump = filters_.pump_energy_ev;
  const double tol = filters_.energy_sum_tolerance_ev;
  double p = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (pa[k] == 0.0) continue;
    const double x = lo + h * (static_cast<double>(k) + 0.5);
    // Object bin centres y_m = lo + (m + 0.5) h inside [pump - tol - x, pump + tol - x].
    const double m_lo = std::ceil((pump - tol - x - lo) / h - 0.5);
    const double m_hi = std::floor((pump + tol - x - lo) / h - 0.5);
    const auto first = static_cast<std::ptrdiff_t>(std::max(0.0, m_lo));
    const auto last = static_cast<std::ptrdiff_t>(std::min(static_cast<double>(n) - 1.0, m_hi));
    if (last < first) continue;
    p += pa[k] * (prefix[static_cast<std::size_t>(last) + 1] - prefix[static_cast<std::size_t>(first)]);
  }
  return std::clamp(p, 0.0, 1.0);
}

double RateModel::true_pair_pass_probability(bool band, bool energy_sum) const {
  if (!band && !energy_sum) return 1.0;
  const auto& da = detectors_.ancilla;
  const auto& dob = detectors_.object;
  const double pump = pairs_.pump_energy_ev();
  const double lo = filters_.band_low();
  const double hi = filters_.band_high();
  const double tol = filters_.energy_sum_tolerance_ev;
  const double inf = std::numeric_limits<double>::infinity();

  // Measured ancilla energy x = g_a (E_a + s_a Z) must land in the band
  // and, given the object value y, in the energy-sum strip.
  auto ancilla_prob = [&](double e_a, double y) {
    double a = band ? lo : -inf;
    double b = band ? hi : inf;
    if (energy_sum) {
      a = std::max(a, filters_.pump_energy_ev - tol - y);
      b = std::min(b, filters_.pump_energy_ev + tol - y);
    }
    return normal_interval(e_a, da.energy_sigma_ev, a / da.calibration_gain, b / da.calibration_gain);
  };

  std::vector<double> nodes;
  if (pairs_.object_width_ev() > 0.0) {
    const double w = pairs_.object_width_ev();
    const double start = pairs_.object_center_ev() - 0.5 * w;
    for (int i = 0; i < kPairNodes; ++i) nodes.push_back(start + w * (i + 0.5) / kPairNodes);
  } else {
    nodes.push_back(pairs_.object_center_ev());
  }

  double total = 0.0;
  for (double e_o : nodes) {
    const double e_a = pump - e_o;
    const double g = dob.calibration_gain;
    const double s = dob.energy_sigma_ev;
    if (s <= 0.0) {
      const double y = g * e_o;
      if (!band || (y >= lo && y <= hi)) total += ancilla_prob(e_a, y);
      continue;
    }
    const double y_lo = band ? lo : g * (e_o - 8.0 * s);
    const double y_hi = band ? hi : g * (e_o + 8.0 * s);
    const auto n = static_cast<std::size_t>(std::ceil((y_hi - y_lo) / kBinEv));
    const double h = (y_hi - y_lo) / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const double y0 = y_lo + h * static_cast<double>(m);
      const double py = normal_interval(e_o, s, y0 / g, (y0 + h) / g);
      if (py < 1e-300) continue;
      acc += py * ancilla_prob(e_a, y0 + 0.5 * h);
    }
    total += acc;
  }
  return std::clamp(total / static_cast<double>(nodes.size()), 0.0, 1.0);
}

ModeRate RateModel::quantum(double t) const {
  const auto& da = detectors_.ancilla;
  const auto& dob = detectors_.object;
  const double la = ancilla_live_fraction();
  const double lo = object_live_fraction(t);
  ModeRate r;
  r.true_hz = source_.pdc_pair_rate_hz * t * da.quantum_efficiency * dob.quantum_efficiency * la * lo *
              true_pair_pass_probability(true, true);
  for (const auto& a : ancilla_components()) {
    if (a.rate_hz <= 0.0) continue;
    for (const auto& o : object_components(t)) {
      if (o.rate_hz <= 0.0) continue;
      const double ra = a.rate_hz * da.quantum_efficiency * la;
      const double ro = o.rate_hz * dob.quantum_efficiency * lo;
      r.accidental_hz += ra * ro * window_ns_ / kNsPerSecond * accidental_pass(a.spectrum, o.spectrum, true);
    }
  }
  return r;
}

ModeRate RateModel::classical_coincidence(double t, bool apply_band) const {
  const auto& da = detectors_.ancilla;
  const auto& dob = detectors_.object;
  const double la = ancilla_live_fraction();
  const double lo = object_live_fraction(t);
  ModeRate r;
  r.true_hz = source_.pdc_pair_rate_hz * t * da.quantum_efficiency * dob.quantum_efficiency * la * lo *
              true_pair_pass_probability(apply_band, false);
  const double ra = ancilla_singles_hz(apply_band);
  const double ro = object_singles_hz(t, apply_band);
  r.accidental_hz = ra * ro * window_ns_ / kNsPerSecond;
  return r;
}

ModeRate RateModel::classical_singles(double t) const {
  ModeRate r;
  r.true_hz = object_singles_hz(t, true);
  return r;
}

ModeRate RateModel::mode_rate(ScanMode mode, double t, bool band_in_mode_c) const {
  switch (mode) {
    case ScanMode::A_Quantum: return quantum(t);
    case ScanMode::B_ClassicalSingles: return classical_singles(t);
    case ScanMode::C_ClassicalCoincidence: return classical_coincidence(t, band_in_mode_c);
  }
  return {};
}

double noise_to_signal_ratio(const SourceConfig& source, const PairEnergySampler& pairs, double t, double range_low_ev,
                             double range_high_ev) {
  const double noise = (source.noise_rate_object_ambient_hz + source.noise_rate_object_transmitted_hz * t +
                        source.object_fluorescence_coefficient_hz * (1.0 - t)) *
                       source.noise_spectrum.mass_between(range_low_ev, range_high_ev);
  const double signal = source.pdc_pair_rate_hz * t * pairs.object_spectrum().mass_between(range_low_ev, range_high_ev);
  if (signal <= 0.0) return std::numeric_limits<double>::infinity();
  return noise / signal;
}

SourceConfig calibrate_quantum_source(const SourceConfig& base, const PairEnergySampler& pairs,
                                      const DetectorPair& detectors, const FilterConfig& filters,
                                      const QuantumCalibration& target) {
  const double noise_mass = base.noise_spectrum.mass_between(target.range_low_ev, target.range_high_ev);
  const double signal_mass = pairs.object_spectrum().mass_between(target.range_low_ev, target.range_high_ev);
  if (noise_mass <= 0.0 || signal_mass <= 0.0) {
    throw Error(Errc::InvalidConfig, "calibration: noise or PDC spectrum has no mass in the PDC range");
  }
  SourceConfig s = base;
  s.noise_rate_object_transmitted_hz = 0.0;
  s.object_fluorescence_coefficient_hz = 0.0;
  s.pdc_pair_rate_hz = 1.0;
  const double goal_hz = target.post_selected_per_hour / 3600.0;
  // Live fractions depend weakly on the rates; a few fixed-point passes settle them.
  for (int pass = 0; pass < 8; ++pass) {
    s.noise_rate_object_ambient_hz = target.noise_ratio * s.pdc_pair_rate_hz * signal_mass / noise_mass;
    s.noise_rate_ancilla_hz = target.ancilla_noise_fraction * s.pdc_pair_rate_hz;
    const RateModel model(s, pairs, detectors, filters);
    const double per_pair = model.quantum(1.0).true_hz / s.pdc_pair_rate_hz;
    if (per_pair <= 0.0) throw Error(Errc::InvalidConfig, "calibration: no true pair can pass the quantum selection");
    s.pdc_pair_rate_hz = goal_hz / per_pair;
  }
  s.noise_rate_object_ambient_hz = target.noise_ratio * s.pdc_pair_rate_hz * signal_mass / noise_mass;
  s.noise_rate_ancilla_hz = target.ancilla_noise_fraction * s.pdc_pair_rate_hz;
  return s;
}

}  // namespace xqd::mc
