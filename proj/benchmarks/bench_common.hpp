#ifndef COPROMPT_BENCHMARKS_BENCH_COMMON_HPP_
#define COPROMPT_BENCHMARKS_BENCH_COMMON_HPP_

#include "coprompt/trainer.hpp"

namespace bench {

// Desk-scale setup shared by the benchmarks.
inline coprompt::TrainSetup desk_setup() {
  coprompt::TrainSetup setup;
  setup.game.n = 2;
  setup.game.token_limit = 12;
  setup.game.vocab = coprompt::Vocabulary{12, 11};
  setup.encoder.embed_dim = 12;
  setup.encoder.window = 6;
  setup.encoder.hidden_dim = 48;
  setup.encoder.n_prompters = 2;
  setup.encoder.token_limit = 12;
  setup.reward.oracle.kind = coprompt::OracleKind::kCoverage;
  setup.reward.oracle.coverage_targets = {{1, 0.45}, {3, 0.20}, {5, 0.12},
                                          {7, 0.10}, {9, 0.08}, {10, 0.05}};
  setup.reward.oracle.dup_penalty = 0.05;
  setup.reward.oracle.len_penalty = 0.01;
  setup.reward.oracle.offtarget_penalty = 0.15;
  setup.reward.alpha = 0.25;
  setup.train.batch_size = 16;
  setup.train.minibatch_size = 128;
  setup.train.ppo_epochs = 2;
  setup.train.lr = 0.002;
  setup.prompts.prompts = {coprompt::Prompt{}};
  setup.run_seed = 7;
  return setup;
}

}  // namespace bench

#endif  // COPROMPT_BENCHMARKS_BENCH_COMMON_HPP_
