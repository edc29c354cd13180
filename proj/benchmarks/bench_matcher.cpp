#include <benchmark/benchmark.h>

#include "xqd/coincidence.hpp"
#include "xqd/rng.hpp"

using namespace xqd;

namespace {

EventStream poisson_stream(DetectorId id, std::size_t n, double mean_gap_ns, std::uint64_t seed) {
  Rng rng(seed);
  EventStream s;
  s.reserve(n);
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t += rng.exponential(mean_gap_ns);
    s.push_back({static_cast<std::uint64_t>(t), 11150.0f, id, TruthKind::None});
  }
  return s;
}

}  // namespace

static void BM_AndGateMatch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const double gap = static_cast<double>(state.range(1));
  const auto a = poisson_stream(DetectorId::Ancilla, n, gap, 1);
  const auto o = poisson_stream(DetectorId::Object, n, gap, 2);
  for (auto _ : state) benchmark::DoNotOptimize(and_gate_match(a, o, 1000.0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n));
}
BENCHMARK(BM_AndGateMatch)->Args({100000, 100000})->Args({100000, 1000})->Args({1000000, 10000});

static void BM_WindowHistogram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = poisson_stream(DetectorId::Ancilla, n, 2000.0, 3);
  const auto o = poisson_stream(DetectorId::Object, n, 2000.0, 4);
  for (auto _ : state) benchmark::DoNotOptimize(window_histogram(a, o, 1000.0, WindowAnchor::AncillaTriggered));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n));
}
BENCHMARK(BM_WindowHistogram)->Arg(100000)->Arg(1000000);
