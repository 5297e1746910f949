#include <benchmark/benchmark.h>

#include "symco/measures.hpp"
#include "symco/rates.hpp"

using namespace symco;

static void BM_OccupancyPmf(benchmark::State& state) {
  const auto k = static_cast<std::int64_t>(state.range(0));
  const auto i = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(occupancy_pmf(k, i));
}
BENCHMARK(BM_OccupancyPmf)->Args({6, 6})->Args({1000, 50})->Args({1000000, 200});

static void BM_CollisionRateExplicit(benchmark::State& state) {
  const auto f = CoagulationMeasure::explicit_masses({{2, 1.0}, {5, 0.5}, {40, 2.0}}, 1.0);
  const auto b = static_cast<int>(state.range(0));
  const CollisionSignature sig(b, {b - 3, 2, 1});
  for (auto _ : state) benchmark::DoNotOptimize(collision_rate(f, sig));
}
BENCHMARK(BM_CollisionRateExplicit)->Arg(6)->Arg(12)->Arg(30);

static void BM_CollisionRatePowerLaw(benchmark::State& state) {
  const auto f = CoagulationMeasure::power_law(0.7);
  const auto b = static_cast<int>(state.range(0));
  const CollisionSignature sig(b, {b - 3, 2, 1});
  for (auto _ : state) benchmark::DoNotOptimize(collision_rate(f, sig));
}
BENCHMARK(BM_CollisionRatePowerLaw)->Arg(6)->Arg(12);

static void BM_GeneratorPowerLaw(benchmark::State& state) {
  const auto f = CoagulationMeasure::power_law(0.7);
  const auto n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(block_counting_generator(f, n));
}
BENCHMARK(BM_GeneratorPowerLaw)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_TotalRateCollisionSum(benchmark::State& state) {
  const auto f = CoagulationMeasure::power_law(0.5);
  const auto n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(total_rate(f, n, RateMethod::collision_prob_sum));
}
BENCHMARK(BM_TotalRateCollisionSum)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);
