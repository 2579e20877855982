#include <benchmark/benchmark.h>

#include "bench_common.hpp"

namespace {

using namespace coprompt;

void BM_RunEpisode(benchmark::State& state) {
  const TrainSetup setup = bench::desk_setup();
  const std::vector<PrompterNets> nets = init_nets(setup);
  std::vector<PolicyHandle> handles;
  for (const PrompterNets& n : nets) {
    handles.push_back(make_sampling_handle(n.policy, setup.encoder));
  }
  uint64_t episode = 0;
  for (auto _ : state) {
    Rng rng(episode_seed(setup.run_seed, streams::kRollout, 1, episode++));
    const Trajectory traj = run_episode(handles, Prompt{}, setup.game, rng);
    benchmark::DoNotOptimize(traj.tokens.size());
  }
}
BENCHMARK(BM_RunEpisode);

void BM_Gae(benchmark::State& state) {
  std::vector<double> values(static_cast<size_t>(state.range(0)));
  Rng rng(3);
  for (double& v : values) v = rng.next_uniform(-1, 1);
  for (auto _ : state) {
    const GaeResult g = gae(values, 1.0, 0.95);
    benchmark::DoNotOptimize(g.advantages[0]);
  }
}
BENCHMARK(BM_Gae)->Arg(6)->Arg(12);

}  // namespace
