// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Optional argument: path of the property-test binary.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "xqd/coincidence.hpp"
#include "xqd/config.hpp"
#include "xqd/error.hpp"
#include "xqd/imaging.hpp"
#include "xqd/phasematch.hpp"
#include "xqd/postselect.hpp"
#include "xqd/rate_model.hpp"
#include "xqd/stats.hpp"

using namespace xqd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool run_criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = limit_s <= 0.0 || s < limit_s;
  const bool ok = o.pass && in_time;
  std::printf("criterion %d %s: %s  %s  [%.2f s%s]\n", id, name, ok ? "PASS" : "FAIL", o.detail.c_str(), s,
              in_time ? "" : fmt(" > %.0f s limit", limit_s).c_str());
  std::fflush(stdout);
  return ok;
}

const RunConfig kConfig;

// 1. Ideal heralding: every selected window holds one photon per detector.
Outcome sub_poissonian() {
  auto src = kConfig.source;
  src.pdc_pair_rate_hz = 1.0;
  src.noise_rate_ancilla_hz = 0.0;
  src.noise_rate_object_ambient_hz = 0.0;
  src.noise_rate_object_transmitted_hz = 0.0;
  src.object_fluorescence_coefficient_hz = 0.0;
  src.run_duration_s = 20000.0;
  auto det = kConfig.detectors;
  det.ancilla.quantum_efficiency = det.object.quantum_efficiency = 1.0;
  const auto pairs = kConfig.pair_sampler();
  const auto streams = mc::acquire(src, pairs.pump_energy_ev(), pairs, 1.0, det, 1);
  const auto records = and_gate_match(streams.ancilla, streams.object, det.ancilla.logic_pulse_width_ns,
                                      det.object.logic_pulse_width_ns);
  const auto selected = selected_events(quantum_select(records, kConfig.filters));
  const auto h = window_histogram(selected.ancilla, selected.object, det.ancilla.logic_pulse_width_ns,
                                  WindowAnchor::AncillaTriggered);
  const double sigma = degree_of_correlation(h);
  const bool pass = h.total_windows >= 10000 && h.at(1, 1) == h.total_windows && sigma == 0.0;
  return {pass, fmt("windows %llu, at (1,1) %llu, sigma %.3g", static_cast<unsigned long long>(h.total_windows),
                    static_cast<unsigned long long>(h.at(1, 1)), sigma)};
}

// 2. Classical baselines.
Outcome classical_sigma() {
  const auto pairs = kConfig.pair_sampler();
  // Independent Poisson streams, fixed 1 us clock, one photon per window on average.
  mc::SourceConfig poisson;
  poisson.noise_rate_ancilla_hz = 1e6;
  poisson.noise_rate_object_ambient_hz = 1e6;
  poisson.run_duration_s = 0.2;
  auto det = kConfig.detectors;
  det.ancilla.dead_time_ns = det.object.dead_time_ns = 0.0;
  const auto p = mc::acquire(poisson, pairs.pump_energy_ev(), pairs, 1.0, det, 2);
  const auto hp = window_histogram(p.ancilla, p.object, 1000.0, WindowAnchor::FixedClock, poisson.run_duration_s * 1e9);
  const double sigma_raw = degree_of_correlation(hp);

  // Classical illumination with at-least-one-photon post-selection.
  const auto c = mc::acquire(kConfig.classical_source, pairs.pump_energy_ev(), pairs, 1.0, kConfig.detectors, 3);
  const auto hc = classical_postselect(window_histogram(c.ancilla, c.object,
                                                        kConfig.detectors.ancilla.logic_pulse_width_ns,
                                                        WindowAnchor::AncillaTriggered));
  const double sigma_post = degree_of_correlation(hc);
  const bool pass = hp.total_windows >= 100000 && std::abs(sigma_raw - 1.0) <= 0.05 && std::abs(sigma_post - 0.25) <= 0.07;
  return {pass, fmt("independent: %llu windows, sigma %.4f (1.00 +- 0.05); post-selected: %llu windows, sigma %.4f "
                    "(0.25 +- 0.07)",
                    static_cast<unsigned long long>(hp.total_windows), sigma_raw,
                    static_cast<unsigned long long>(hc.total_windows), sigma_post)};
}

// 3 and 4 share the scans.
struct ModeRuns {
  std::vector<StatsReport> stats;
  ScanImage pooled;
  int failures = 0;
  double seconds = 0.0;
};

constexpr int kSeeds = 20;

ModeRuns scan_mode(ScanMode mode) {
  const auto t0 = std::chrono::steady_clock::now();
  auto scan = kConfig.scan;
  scan.mode = mode;
  ModeRuns out;
  std::vector<std::uint64_t> pooled(scan.positions_mm.size(), 0);
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const auto r = run_scan(kConfig.object, scan, kConfig.source_for(mode), kConfig.pair_sampler(), kConfig.detectors,
                            kConfig.filters, static_cast<std::uint64_t>(seed));
    for (std::size_t i = 0; i < pooled.size(); ++i) pooled[i] += r.image.counts[i];
    try {
      out.stats.push_back(image_stats(r.image));
    } catch (const Error&) {
      ++out.failures;
      out.stats.emplace_back();
      out.stats.back().visibility = NAN;
    }
  }
  out.pooled = ScanImage::from_counts(scan.positions_mm, std::move(pooled), mode);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

double mean_visibility(const ModeRuns& r) {
  double s = 0.0;
  for (const auto& st : r.stats) s += st.visibility;
  return s / static_cast<double>(r.stats.size());
}

double mean_snr(const ModeRuns& r) {
  double s = 0.0;
  for (const auto& st : r.stats) s += st.snr.infinite() ? INFINITY : *st.snr.value;
  return s / static_cast<double>(r.stats.size());
}

ModeRuns g_a, g_b, g_c;

Outcome imaging() {
  g_a = scan_mode(ScanMode::A_Quantum);
  g_b = scan_mode(ScanMode::B_ClassicalSingles);
  g_c = scan_mode(ScanMode::C_ClassicalCoincidence);
  const double va = mean_visibility(g_a), vb = mean_visibility(g_b), vc = mean_visibility(g_c);
  int ordered = 0;
  for (int i = 0; i < kSeeds; ++i) {
    const double a = g_a.stats[i].visibility, b = g_b.stats[i].visibility, c = g_c.stats[i].visibility;
    ordered += (a > c && c > b) ? 1 : 0;
  }
  const bool pass = g_a.failures + g_b.failures + g_c.failures == 0 && va >= 0.99 && vb >= 0.15 && vb <= 0.35 &&
                    vc >= 0.35 && vc <= 0.55 && ordered >= 19;
  return {pass, fmt("%d seeds x %zu positions: v_A %.4f (>= 0.99), v_B %.4f [0.15, 0.35], v_C %.4f [0.35, 0.55], "
                    "A > C > B in %d/%d (>= 19); partition failures %d; scan time A %.1f s, B %.1f s, C %.1f s",
                    kSeeds, kConfig.scan.positions_mm.size(), va, vb, vc, ordered, kSeeds,
                    g_a.failures + g_b.failures + g_c.failures, g_a.seconds, g_b.seconds, g_c.seconds)};
}

Outcome snr_enhancement() {
  if (g_a.stats.empty()) return {false, "criterion 3 scans unavailable"};
  const double sb = mean_snr(g_b), sc = mean_snr(g_c);
  // Mode A minima are empty in every run, so pool the seeds and bound the
  // minimum level by the 95% Poisson upper limit when no count is seen.
  const auto pa = image_stats(g_a.pooled);
  double snr_a_low = 0.0;
  std::string a_text;
  if (pa.snr.infinite()) {
    const double i_min_upper = 2.996 / static_cast<double>(pa.n_min_positions);
    snr_a_low = pa.i_max_mean / i_min_upper;
    a_text = fmt("INFINITE (pooled I_min = 0; lower bound %.0f)", snr_a_low);
  } else {
    snr_a_low = *pa.snr.value;
    a_text = fmt("%.1f", snr_a_low);
  }
  const double ratio = snr_a_low / std::max(sb, sc);
  const bool pass = ratio >= 100.0 && sb >= 1.2 && sb <= 2.0 && sc >= 2.0 && sc <= 3.5;
  return {pass, fmt("SNR_A %s, SNR_B %.3f [1.2, 2.0], SNR_C %.3f [2.0, 3.5], SNR_A / max(SNR_B, SNR_C) >= %.0f (>= 100)",
                    a_text.c_str(), sb, sc, ratio)};
}

// 5. Phase matching.
Outcome phase_matching() {
  const auto& g = kConfig.crystal;
  const double bragg = rad_to_deg(phasematch::bragg_angle(g));
  const auto d = phasematch::degenerate_solution(g);
  const double sep = rad_to_deg(d.separation_rad());
  bool sums_exact = true, monotonic = true;
  double last_angle = -INFINITY;
  // Signal energy sweep 9-13 keV: the signal angle falls strictly as the energy rises.
  for (double e = 9000.0; e <= 13000.0; e += 50.0) {
    const auto s = phasematch::solve_phase_matching(g, e);
    sums_exact &= s.signal_energy_ev + s.idler_energy_ev == g.pump_energy_ev;
    if (last_angle != -INFINITY) monotonic &= s.signal_angle_rad < last_angle;
    last_angle = s.signal_angle_rad;
  }
  const auto lo = phasematch::solve_phase_matching(g, 13000.0).signal_angle_rad;
  const auto hi = phasematch::solve_phase_matching(g, 9000.0).signal_angle_rad;
  const auto curve = phasematch::angle_energy_curve(g, lo, hi, 401);
  double last_energy = INFINITY;
  std::size_t solved = 0;
  for (const auto& p : curve) {
    if (!p.solution) continue;
    ++solved;
    sums_exact &= p.solution->signal_energy_ev + p.solution->idler_energy_ev == g.pump_energy_ev;
    monotonic &= p.solution->signal_energy_ev < last_energy;
    last_energy = p.solution->signal_energy_ev;
  }
  const bool pass = std::abs(bragg - 41.45) <= 0.15 && std::abs(sep - 2.06) <= 0.10 && monotonic && sums_exact &&
                    solved == curve.size();
  return {pass, fmt("Bragg %.4f deg (41.45 +- 0.15), separation %.4f deg (2.06 +- 0.10), curve %zu/%zu solved, "
                    "monotonic %s, energy sums exact %s",
                    bragg, sep, solved, curve.size(), monotonic ? "yes" : "no", sums_exact ? "yes" : "no")};
}

// 6. Accidentals passing quantum_select, analytic and by delayed coincidences.
Outcome accidental_suppression() {
  const auto pairs = kConfig.pair_sampler();
  const mc::RateModel model(kConfig.source, pairs, kConfig.detectors, kConfig.filters);
  const auto q = model.quantum(1.0);
  const double ratio = q.accidental_hz / q.true_hz;
  const double singles_ratio = mc::noise_to_signal_ratio(kConfig.source, pairs);

  // Scaled noise, no dead time. The object stream is compared with the
  // ancilla stream delayed by 10 us, where true pairs cannot appear.
  auto src = kConfig.source;
  src.noise_rate_ancilla_hz *= 1e5;
  src.noise_rate_object_ambient_hz *= 100.0;
  src.run_duration_s = 500.0;
  auto det = kConfig.detectors;
  det.ancilla.dead_time_ns = det.object.dead_time_ns = 0.0;
  constexpr std::uint64_t kDelay = 10000;
  const double wa = det.ancilla.logic_pulse_width_ns, wo = det.object.logic_pulse_width_ns;
  mc::AcquisitionOptions opt;
  opt.object_gate = mc::ObjectGate{wo + 2.0, static_cast<double>(kDelay) + wa + 2.0};
  const auto s = mc::acquire(src, pairs.pump_energy_ev(), pairs, 1.0, det, 6, opt);
  auto delayed = s.ancilla;
  for (auto& e : delayed) e.timestamp_ns += kDelay;
  const auto acc = quantum_select(and_gate_match(delayed, s.object, wa, wo), kConfig.filters);
  const double measured = static_cast<double>(acc.size());
  const mc::RateModel scaled(src, pairs, det, kConfig.filters);
  const double predicted = scaled.quantum(1.0).accidental_hz * src.run_duration_s;
  const double tol = 4.0 * std::sqrt(predicted) + 0.03 * predicted;
  const bool agree = std::abs(measured - predicted) <= tol;
  const bool pass = ratio <= 1e-4 && agree;
  return {pass, fmt("true %.1f /h, accidental %.3g /h, ratio %.3g (<= 1e-4), in-range noise/signal %.3g; delayed "
                    "coincidences at scaled rates: %.0f measured vs %.1f predicted (tolerance %.1f)",
                    q.true_hz * 3600.0, q.accidental_hz * 3600.0, ratio, singles_ratio, measured, predicted, tol)};
}

// 7. Property suites, run as a child process.
Outcome property_suites(const char* binary) {
  if (binary == nullptr) return {false, "property-test binary not given"};
  const std::string cmd = std::string("\"") + binary + "\" --gtest_brief=1 > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return {rc == 0, fmt("%s exit status %d", binary, rc)};
}

}  // namespace

int main(int argc, char** argv) {
  const char* properties = argc > 1 ? argv[1] : nullptr;
  int failed = 0;
  failed += !run_criterion(1, "sub-Poissonian heralding", 10.0, sub_poissonian);
  failed += !run_criterion(2, "classical baseline sigma", 30.0, classical_sigma);
  failed += !run_criterion(3, "imaging visibilities", 120.0, imaging);
  failed += !run_criterion(4, "SNR enhancement", 0.0, snr_enhancement);
  failed += !run_criterion(5, "phase matching", 1.0, phase_matching);
  failed += !run_criterion(6, "accidental suppression", 0.0, accidental_suppression);
  failed += !run_criterion(7, "property suites", 0.0, [&] { return property_suites(properties); });
  std::printf("%s: %d of 7 criteria failed\n", failed == 0 ? "ACCEPTED" : "REJECTED", failed);
  return failed == 0 ? 0 : 1;
}
