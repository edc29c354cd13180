#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "xqd/montecarlo.hpp"

using namespace xqd;

namespace {

mc::SourceConfig random_source(gen::Gen& g) {
  mc::SourceConfig s;
  s.pdc_pair_rate_hz = g.coin(0.8) ? g.uniform(0.0, 2e4) : 0.0;
  s.noise_rate_ancilla_hz = g.coin(0.8) ? g.uniform(0.0, 2e4) : 0.0;
  s.noise_rate_object_ambient_hz = g.coin(0.8) ? g.uniform(0.0, 2e4) : 0.0;
  s.noise_rate_object_transmitted_hz = g.coin(0.8) ? g.uniform(0.0, 2e4) : 0.0;
  s.object_fluorescence_coefficient_hz = g.coin(0.8) ? g.uniform(0.0, 2e4) : 0.0;
  s.run_duration_s = g.uniform(0.01, 0.5);
  return s;
}

const mc::PairEnergySampler kPairs(22300.0, 11150.0, 200.0);

}  // namespace

TEST(MonteCarloProperty, EmissionCountMatchesPoissonMean) {
  gen::Gen g(0x5eed0301);
  for (int c = 0; c < 150; ++c) {
    const auto src = random_source(g);
    const double t = g.uniform(0.0, 1.0);
    const auto truth = mc::generate_truth(src, 22300.0, kPairs, t, g.integer(0, 1ull << 40));
    const double mean = mc::expected_emissions(src, t);
    // 5 sigma keeps the false alarm rate over the suite negligible.
    ASSERT_NEAR(static_cast<double>(truth.size()), mean, 5.0 * std::sqrt(mean) + 1.0) << "case " << c;
    for (std::size_t i = 1; i < truth.size(); ++i) ASSERT_LE(truth[i - 1].time_ns, truth[i].time_ns);
    for (const auto& e : truth) {
      ASSERT_GE(e.time_ns, 0.0);
      ASSERT_LT(e.time_ns, src.run_duration_s * 1e9);
      if (e.kind == TruthKind::PdcPair) {
        ASSERT_TRUE(e.ancilla_energy_ev && e.object_energy_ev);
        ASSERT_NEAR(*e.ancilla_energy_ev + *e.object_energy_ev, 22300.0, 1e-9);
      }
    }
  }
}

TEST(MonteCarloProperty, DeadTimeAndOrdering) {
  gen::Gen g(0x5eed0302);
  for (int c = 0; c < 100; ++c) {
    const auto src = random_source(g);
    mc::DetectorPair d;
    d.ancilla.dead_time_ns = g.uniform(0.0, 5000.0);
    d.object.dead_time_ns = g.uniform(0.0, 5000.0);
    d.ancilla.quantum_efficiency = g.uniform(0.1, 1.0);
    d.object.quantum_efficiency = g.uniform(0.1, 1.0);
    mc::AcquisitionOptions opt;
    opt.max_emissions_per_shard = g.pick(std::vector<double>{64.0, 1000.0, 1 << 18});
    const auto s = mc::acquire(src, 22300.0, kPairs, g.uniform(0.0, 1.0), d, g.integer(0, 1ull << 40), opt);
    for (const auto* stream : {&s.ancilla, &s.object}) {
      const double dead = stream == &s.ancilla ? d.ancilla.dead_time_ns : d.object.dead_time_ns;
      for (std::size_t i = 1; i < stream->size(); ++i) {
        const auto gap = (*stream)[i].timestamp_ns - (*stream)[i - 1].timestamp_ns;
        ASSERT_GE(static_cast<double>(gap), dead) << "case " << c;
        ASSERT_GE((*stream)[i].timestamp_ns, (*stream)[i - 1].timestamp_ns);
      }
      for (const auto& e : *stream) ASSERT_GT(e.energy_ev, 0.0f);
    }
  }
}

TEST(MonteCarloProperty, ShardingDoesNotChangeRate) {
  gen::Gen g(0x5eed0303);
  for (int c = 0; c < 30; ++c) {
    auto src = random_source(g);
    src.pdc_pair_rate_hz = g.uniform(1e3, 2e4);
    mc::DetectorPair d;
    d.ancilla.dead_time_ns = d.object.dead_time_ns = 0.0;
    mc::AcquisitionOptions small;
    small.max_emissions_per_shard = 100.0;
    const auto a = mc::acquire(src, 22300.0, kPairs, 1.0, d, 11, small);
    const double mean = (src.pdc_pair_rate_hz + src.noise_rate_ancilla_hz) * src.run_duration_s;
    ASSERT_NEAR(static_cast<double>(a.ancilla.size()), mean, 5.0 * std::sqrt(mean) + 1.0) << "case " << c;
  }
}

TEST(MonteCarloProperty, GatedObjectEventsStayNearAncillaEmissions) {
  gen::Gen g(0x5eed0304);
  for (int c = 0; c < 60; ++c) {
    auto src = random_source(g);
    src.pdc_pair_rate_hz = g.uniform(10.0, 2000.0);
    src.noise_rate_ancilla_hz = g.uniform(10.0, 2000.0);
    const mc::ObjectGate gate{g.uniform(0.0, 3000.0), g.uniform(0.0, 3000.0)};
    const auto seed = g.integer(0, 1ull << 40);
    const double t = g.uniform(0.0, 1.0);
    const auto gated = mc::generate_truth(src, 22300.0, kPairs, t, seed, gate);
    const auto full = mc::generate_truth(src, 22300.0, kPairs, t, seed);
    std::vector<double> anchors;
    for (const auto& e : full) {
      if (e.kind == TruthKind::PdcPair || e.kind == TruthKind::AmbientNoiseAncilla) anchors.push_back(e.time_ns);
    }
    std::size_t n_anchor_gated = 0;
    for (const auto& e : gated) {
      if (e.kind == TruthKind::PdcPair || e.kind == TruthKind::AmbientNoiseAncilla) {
        ++n_anchor_gated;
        continue;
      }
      const auto it = std::lower_bound(anchors.begin(), anchors.end(), e.time_ns - gate.after_ns);
      ASSERT_TRUE(it != anchors.end() && *it <= e.time_ns + gate.before_ns) << "case " << c;
    }
    ASSERT_EQ(n_anchor_gated, anchors.size()) << "case " << c;
    ASSERT_LE(gated.size(), full.size() + 5.0 * std::sqrt(double(full.size())) + 5.0);
  }
}
