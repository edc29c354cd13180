#include <benchmark/benchmark.h>

#include "xqd/phasematch.hpp"

using namespace xqd;
using namespace xqd::phasematch;

static void BM_SolvePhaseMatching(benchmark::State& state) {
  const CrystalGeometry g;
  double e = 9000.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_phase_matching(g, e));
    e = e >= 13000.0 ? 9000.0 : e + 1.0;
  }
}
BENCHMARK(BM_SolvePhaseMatching);

static void BM_SolveForSignalAngle(benchmark::State& state) {
  const CrystalGeometry g;
  const auto d = degenerate_solution(g);
  for (auto _ : state) benchmark::DoNotOptimize(solve_for_signal_angle(g, d.signal_angle_rad + 1e-5));
}
BENCHMARK(BM_SolveForSignalAngle);

static void BM_AngleEnergyCurve(benchmark::State& state) {
  const CrystalGeometry g;
  const auto d = degenerate_solution(g);
  const double half = deg_to_rad(0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(angle_energy_curve(g, d.signal_angle_rad - half, d.signal_angle_rad + half,
                                                static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_AngleEnergyCurve)->Arg(201);
