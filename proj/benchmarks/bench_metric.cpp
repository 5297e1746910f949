#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "symco/metric.hpp"
#include "symco/random.hpp"

using namespace symco;

static StepPath random_path(Rng& rng, int jumps) {
  std::vector<double> raw;
  for (int i = 0; i < jumps; ++i) raw.push_back(uniform_open(rng));
  std::sort(raw.begin(), raw.end());
  std::vector<double> ts{0.0}, vs{uniform01(rng)};
  for (double t : raw)
    if (t > ts.back()) {
      ts.push_back(t);
      vs.push_back(uniform01(rng));
    }
  return StepPath(1.0, ts, vs);
}

static void BM_J1Distance(benchmark::State& state) {
  Rng rng = make_stream(5, 0);
  const auto jumps = static_cast<int>(state.range(0));
  const auto x = random_path(rng, jumps);
  const auto y = random_path(rng, jumps);
  for (auto _ : state) benchmark::DoNotOptimize(j1_distance(x, y));
}
BENCHMARK(BM_J1Distance)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

static void BM_DLambdaUpper(benchmark::State& state) {
  Rng rng = make_stream(6, 0);
  const auto jumps = static_cast<int>(state.range(0));
  const auto x = random_path(rng, jumps);
  const auto y = random_path(rng, jumps);
  for (auto _ : state) benchmark::DoNotOptimize(d_lambda_upper(x, y));
}
BENCHMARK(BM_DLambdaUpper)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);
