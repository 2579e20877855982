#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "coprompt/enumeration.hpp"

namespace {

using namespace coprompt;

void BM_EnumerateOptimal(benchmark::State& state) {
  const TrainSetup setup = bench::desk_setup();
  const int max_len = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const EnumerationResult r = enumerate_optimal(
        setup.reward.oracle, Prompt{}, setup.game.vocab, max_len);
    benchmark::DoNotOptimize(r.best_reward);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()));
}
BENCHMARK(BM_EnumerateOptimal)->Arg(3)->Arg(4)->Arg(5)
    ->Unit(benchmark::kMillisecond);

void BM_ProblemSize(benchmark::State& state) {
  const std::vector<int64_t> lengths{40, 40};
  for (auto _ : state) {
    const auto [multi, single] = problem_size(12, lengths);
    benchmark::DoNotOptimize(multi);
    benchmark::DoNotOptimize(single);
  }
}
BENCHMARK(BM_ProblemSize);

}  // namespace
