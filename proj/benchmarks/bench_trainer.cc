#include <benchmark/benchmark.h>

#include "bench_common.hpp"

namespace {

using namespace coprompt;

void BM_TrainIteration(benchmark::State& state) {
  const TrainSetup setup = bench::desk_setup();
  std::vector<PrompterNets> nets = init_nets(setup);
  uint64_t iteration = 0;
  for (auto _ : state) {
    const IterationMetrics m = train_iteration(setup, nets, ++iteration);
    benchmark::DoNotOptimize(m.mean_reward);
  }
}
BENCHMARK(BM_TrainIteration)->Unit(benchmark::kMillisecond);

}  // namespace
