#include <benchmark/benchmark.h>

#include "bench_common.hpp"

namespace {

using namespace coprompt;

void BM_PolicyForward(benchmark::State& state) {
  const TrainSetup setup = bench::desk_setup();
  Rng rng(1);
  const PolicyParams params =
      init_policy_params(setup.game.vocab, setup.encoder, rng);
  const Prompt x{{1, 4}};
  const std::vector<TokenId> prefix{2, 5, 11, 7};
  for (auto _ : state) {
    const PolicyForward fwd =
        policy_forward(x, prefix, 1, 6, params, setup.encoder);
    benchmark::DoNotOptimize(fwd.logits[0]);
  }
}
BENCHMARK(BM_PolicyForward);

void BM_PolicyLogprobEntropyGrad(benchmark::State& state) {
  const TrainSetup setup = bench::desk_setup();
  Rng rng(1);
  const PolicyParams params =
      init_policy_params(setup.game.vocab, setup.encoder, rng);
  const Prompt x{{1, 4}};
  const std::vector<TokenId> prefix{2, 5, 11, 7};
  for (auto _ : state) {
    const LogprobEntropyGrad g =
        logprob_entropy_grad(x, prefix, 1, 6, 3, params, setup.encoder);
    benchmark::DoNotOptimize(g.grad_logprob.w1.data[0]);
  }
}
BENCHMARK(BM_PolicyLogprobEntropyGrad);

void BM_CriticValue(benchmark::State& state) {
  const TrainSetup setup = bench::desk_setup();
  Rng rng(2);
  const CriticParams params =
      init_critic_params(setup.game.vocab, setup.encoder, rng);
  const Prompt x{{1, 4}};
  const std::vector<TokenId> prefix{2, 5, 11, 7};
  const std::vector<TokenId> next{3, 9};
  for (auto _ : state) {
    benchmark::DoNotOptimize(critic_value(x, prefix, next, 0, 6, params,
                                          setup.encoder,
                                          setup.game.vocab.eos_id));
  }
}
BENCHMARK(BM_CriticValue);

}  // namespace
