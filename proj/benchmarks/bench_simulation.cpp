#include <benchmark/benchmark.h>

#include "symco/coalescent.hpp"
#include "symco/measures.hpp"
#include "symco/random.hpp"
#include "symco/sde.hpp"

using namespace symco;

static void BM_Binomial(benchmark::State& state) {
  Rng rng = make_stream(1, 0);
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(binomial(rng, n, 0.3));
}
BENCHMARK(BM_Binomial)->Arg(20)->Arg(1000)->Arg(1000000);

static void BM_SCoalescentCounts(benchmark::State& state) {
  const auto f = CoagulationMeasure::power_law(0.5);
  const auto n = static_cast<int>(state.range(0));
  Rng rng = make_stream(2, 0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_s_coalescent(f, n, rng, TrackMode::counts));
}
BENCHMARK(BM_SCoalescentCounts)->Arg(64)->Arg(1024)->Unit(benchmark::kMicrosecond);

static void BM_SCoalescentPartitions(benchmark::State& state) {
  const auto f = CoagulationMeasure::explicit_masses({{2, 1.0}, {3, 1.0}}, 1.0);
  const auto n = static_cast<int>(state.range(0));
  Rng rng = make_stream(3, 0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_s_coalescent(f, n, rng, TrackMode::partitions));
}
BENCHMARK(BM_SCoalescentPartitions)->Arg(64)->Unit(benchmark::kMicrosecond);

static void BM_SdePath(benchmark::State& state) {
  JumpDiffusionSpec spec;
  spec.model = Sde1{DiscreteLaw::point(2), 1.0};
  spec.alpha = state.range(0) == 1 ? 1.0 : 0.5;
  spec.horizon = 0.5;
  spec.dt = 1e-3;
  Rng rng = make_stream(4, 0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_sde(spec, rng));
}
BENCHMARK(BM_SdePath)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
