#include <gtest/gtest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "support.hpp"
#include "xqd/imaging.hpp"
#include "xqd/rate_model.hpp"

using namespace xqd;
using namespace xqd::mc;

namespace {

// Simpson integral of P(low <= g (E + s Z) <= high) for E uniform on [a, b].
double uniform_window_oracle(double a, double b, double s, double g, double low, double high) {
  const int n = 4000;
  const double h = (b - a) / n;
  auto f = [&](double e) {
    const double z_hi = (high / g - e) / s;
    const double z_lo = (low / g - e) / s;
    return 0.5 * (std::erf(z_hi / std::sqrt(2.0)) - std::erf(z_lo / std::sqrt(2.0)));
  };
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0 / (b - a);
}

}  // namespace

TEST(SmearedWindow, LineMatchesGaussian) {
  const auto line = EnergySpectrum::line(11150.0);
  EXPECT_NEAR(smeared_window_probability(line, 354.0, 1.0, 10150.0, 12150.0),
              oracle::gaussian_central_mass(1000.0, 354.0), 1e-12);
}

TEST(SmearedWindow, UniformMatchesQuadrature) {
  const auto u = EnergySpectrum::uniform(9000.0, 13000.0);
  for (double g : {1.0, 1.05}) {
    EXPECT_NEAR(smeared_window_probability(u, 354.0, g, 10150.0, 12150.0),
                uniform_window_oracle(9000.0, 13000.0, 354.0, g, 10150.0, 12150.0), 1e-9);
  }
}

TEST(SmearedWindow, NoSmearingIsMass) {
  const auto u = EnergySpectrum::uniform(9000.0, 13000.0);
  EXPECT_NEAR(smeared_window_probability(u, 0.0, 1.0, 10150.0, 12150.0), 0.5, 1e-12);
}

TEST(CoincidenceWindow, IntegerDifferences) {
  EXPECT_DOUBLE_EQ(coincidence_window_ns(1000.0, 250.0), 501.0);
  EXPECT_DOUBLE_EQ(coincidence_window_ns(1000.0, 250.7), 501.0);
  EXPECT_DOUBLE_EQ(coincidence_window_ns(100.0, 250.0), 199.0);
}

TEST(RateModel, LiveFraction) {
  SourceConfig s;
  s.noise_rate_ancilla_hz = 1.0e6;
  DetectorPair d;
  d.ancilla.dead_time_ns = 100.0;
  const RateModel m(s, PairEnergySampler::degenerate(22300.0), d, FilterConfig{});
  EXPECT_NEAR(m.ancilla_live_fraction(), 1.0 / 1.1, 1e-12);
  EXPECT_NEAR(m.ancilla_singles_hz(false), 1.0e6 / 1.1, 1e-6);
}

TEST(RateModel, TruePairPassMatchesGaussianSum) {
  SourceConfig s;
  s.pdc_pair_rate_hz = 1.0;
  const RateModel m(s, PairEnergySampler::degenerate(22300.0), DetectorPair{}, FilterConfig{});
  // Sum of two independent N(0, 354^2) smearings against a 500 eV window.
  EXPECT_NEAR(m.true_pair_pass_probability(false, true), oracle::gaussian_central_mass(500.0, 354.0 * std::sqrt(2.0)),
              1e-6);
  EXPECT_NEAR(m.true_pair_pass_probability(false, false), 1.0, 1e-12);
}

TEST(RateModel, OpaqueObjectHasNoTrueSignal) {
  const RateModel m(quantum_source_defaults(), PairEnergySampler(22300.0, 11150.49, 209.1), DetectorPair{},
                    FilterConfig{});
  EXPECT_EQ(m.quantum(0.0).true_hz, 0.0);
  EXPECT_GT(m.quantum(0.0).accidental_hz, 0.0);
  // Without dead time the true rate is linear in the transmission.
  DetectorPair d;
  d.ancilla.dead_time_ns = d.object.dead_time_ns = 0.0;
  const RateModel ideal(quantum_source_defaults(), PairEnergySampler(22300.0, 11150.49, 209.1), d, FilterConfig{});
  EXPECT_NEAR(ideal.quantum(0.5).true_hz, 0.5 * ideal.quantum(1.0).true_hz, 1e-15);
  EXPECT_LT(m.quantum(0.5).true_hz, m.quantum(1.0).true_hz);
}

TEST(Calibration, HitsTargets) {
  const auto pairs = PairEnergySampler(22300.0, 11150.49, 209.1);
  const auto cal = calibrate_quantum_source(quantum_source_defaults(), pairs, DetectorPair{}, FilterConfig{});
  const RateModel m(cal, pairs, DetectorPair{}, FilterConfig{});
  EXPECT_NEAR(m.quantum(1.0).true_hz * 3600.0, 100.0, 1e-6);
  EXPECT_NEAR(noise_to_signal_ratio(cal, pairs), 1.0e4, 1e-6);
  EXPECT_NEAR(cal.noise_rate_ancilla_hz, 0.1 * cal.pdc_pair_rate_hz, 1e-15);
}

TEST(Calibration, DefaultsAreCalibrated) {
  const auto pairs = PairEnergySampler::from_phase_matching(phasematch::CrystalGeometry{}, deg_to_rad(0.02));
  const auto cal = calibrate_quantum_source(quantum_source_defaults(), pairs, DetectorPair{}, FilterConfig{});
  const auto d = quantum_source_defaults();
  EXPECT_NEAR(d.pdc_pair_rate_hz, cal.pdc_pair_rate_hz, 1e-6 * cal.pdc_pair_rate_hz);
  EXPECT_NEAR(d.noise_rate_object_ambient_hz, cal.noise_rate_object_ambient_hz, 1e-6 * cal.noise_rate_object_ambient_hz);
}

// Rate model against the Monte Carlo for each detection mode.
TEST(RateModel, AgreesWithSimulation) {
  const auto pairs = PairEnergySampler(22300.0, 11150.49, 209.1);
  auto s = classical_source_defaults();
  s.run_duration_s = 0.2;
  const DetectorPair d;
  const FilterConfig f;
  const RateModel m(s, pairs, d, f);
  for (double t : {0.0, 0.6}) {
    const auto streams = acquire(s, 22300.0, pairs, t, d, 77);
    for (auto mode : {ScanMode::B_ClassicalSingles, ScanMode::C_ClassicalCoincidence, ScanMode::A_Quantum}) {
      const double expected = m.mode_rate(mode, t, true).total_hz() * s.run_duration_s;
      const double got = static_cast<double>(count_mode_events(streams, mode, d, f, true));
      EXPECT_NEAR(got, expected, 5.0 * std::sqrt(expected) + 0.01 * expected) << to_string(mode) << " T=" << t;
    }
  }
}
