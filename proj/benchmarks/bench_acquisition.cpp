#include <benchmark/benchmark.h>

#include "xqd/montecarlo.hpp"

using namespace xqd;

namespace {

const mc::PairEnergySampler kPairs(22300.0, 11150.0, 209.0);

}  // namespace

static void BM_AcquireClassical(benchmark::State& state) {
  auto src = mc::classical_source_defaults();
  src.run_duration_s = static_cast<double>(state.range(0)) / 1000.0;
  std::uint64_t seed = 0;
  std::size_t events = 0;
  for (auto _ : state) {
    const auto s = mc::acquire(src, 22300.0, kPairs, 0.5, mc::DetectorPair{}, ++seed);
    events += s.ancilla.size() + s.object.size();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(events));
}
BENCHMARK(BM_AcquireClassical)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_AcquireQuantumGated(benchmark::State& state) {
  auto src = mc::quantum_source_defaults();
  const mc::DetectorPair d;
  mc::AcquisitionOptions opt;
  opt.object_gate = mc::coincidence_gate(d);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mc::acquire(src, 22300.0, kPairs, 1.0, d, ++seed, opt));
}
BENCHMARK(BM_AcquireQuantumGated)->Unit(benchmark::kMillisecond);
