#include <doctest.h>

#include <cmath>

#include "coprompt/competition.hpp"
#include "coprompt/error.hpp"

using namespace coprompt;

namespace {

TrainSetup competition_setup(uint64_t seed) {
  TrainSetup setup;
  setup.game.n = 1;
  setup.game.token_limit = 2;
  setup.game.vocab = Vocabulary{3, 2};
  setup.encoder.embed_dim = 3;
  setup.encoder.window = 2;
  setup.encoder.hidden_dim = 4;
  setup.encoder.n_prompters = 1;
  setup.encoder.token_limit = 2;
  setup.reward.oracle.kind = OracleKind::kCoverage;
  setup.reward.oracle.coverage_targets = {{0, 1.0}};
  setup.reward.alpha = 0.0;
  setup.train.batch_size = 16;
  setup.train.minibatch_size = 64;
  setup.train.ppo_epochs = 2;
  setup.train.lr = 0.01;
  setup.prompts.prompts = {Prompt{}};
  setup.run_seed = seed;
  return setup;
}

bool params_equal(const PolicyParams& a, const PolicyParams& b) {
  auto at = a.tensors();
  auto bt = b.tensors();
  for (size_t k = 0; k < at.size(); ++k) {
    if (at[k]->data != bt[k]->data) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("competitive reward is the antisymmetric margin") {
  CHECK(competitive_reward(0.7, 0.4) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(competitive_reward(0.5, 0.5) == 0.0);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.next_uniform(-2, 2);
    const double b = rng.next_uniform(-2, 2);
    CHECK(competitive_reward(a, b) + competitive_reward(b, a) == 0.0);
  }
}

TEST_CASE("opponent pool is a ring of frozen snapshots") {
  const TrainSetup setup = competition_setup(1);
  std::vector<PrompterNets> nets = init_nets(setup);

  OpponentPool pool(2);
  CHECK_THROWS_AS([&] { Rng r(1); pool.sample(r); }(), Error);

  PolicyParams a = nets[0].policy;
  a.b2.data[0] = 1.0;
  PolicyParams b = nets[0].policy;
  b.b2.data[0] = 2.0;
  PolicyParams c = nets[0].policy;
  c.b2.data[0] = 3.0;

  pool.push(a);
  CHECK(pool.size() == 1);
  pool.push(b);
  CHECK(pool.size() == 2);
  pool.push(c);  // overwrites the oldest slot
  CHECK(pool.size() == 2);
  CHECK(pool.pushed_count() == 3);
  CHECK(pool.snapshot(0).b2.data[0] == 3.0);
  CHECK(pool.snapshot(1).b2.data[0] == 2.0);

  Rng r1(9);
  Rng r2(9);
  for (int i = 0; i < 20; ++i) {
    CHECK(pool.sample(r1).b2.data[0] == pool.sample(r2).b2.data[0]);
  }

  // Restore round trip.
  std::vector<PolicyParams> ring{pool.snapshot(0), pool.snapshot(1)};
  const OpponentPool restored = OpponentPool::restore(2, ring, 3);
  CHECK(restored.size() == 2);
  CHECK(restored.pushed_count() == 3);
  CHECK(params_equal(restored.snapshot(0), pool.snapshot(0)));
}

TEST_CASE("greedy self-mirror episodes tie exactly") {
  const TrainSetup setup = competition_setup(5);
  std::vector<PrompterNets> nets = init_nets(setup);
  const PolicyHandle greedy = make_greedy_handle(nets[0].policy, setup.encoder);
  for (uint64_t e = 0; e < 20; ++e) {
    Rng ra(episode_seed(setup.run_seed, streams::kRollout, 1, e));
    Rng rb(episode_seed(setup.run_seed, streams::kOpponent, 1, e));
    const Trajectory ta = run_episode({&greedy, 1}, Prompt{}, setup.game, ra);
    const Trajectory tb = run_episode({&greedy, 1}, Prompt{}, setup.game, rb);
    CHECK(ta.tokens == tb.tokens);
    const double ra_task = task_reward(
        Prompt{}, clean_continuation(ta, setup.game.vocab),
        setup.reward.oracle);
    const double rb_task = task_reward(
        Prompt{}, clean_continuation(tb, setup.game.vocab),
        setup.reward.oracle);
    CHECK(competitive_reward(ra_task, rb_task) == 0.0);
  }
}

TEST_CASE("self-play iterations are deterministic and never mutate the pool") {
  const TrainSetup setup = competition_setup(7);
  CompetitionConfig comp;
  comp.pool_capacity = 4;
  comp.snapshot_interval = 2;

  auto run_one = [&](std::vector<IterationMetrics>* out, PrompterNets* final_nets) {
    std::vector<PrompterNets> nets = init_nets(setup);
    OpponentPool pool(comp.pool_capacity);
    pool.push(nets[0].policy);
    const PolicyParams initial_snapshot = pool.snapshot(0);
    for (uint64_t it = 1; it <= 4; ++it) {
      out->push_back(self_play_iteration(setup, comp, nets[0], pool, it));
      CHECK(params_equal(pool.snapshot(0), initial_snapshot));
    }
    // Snapshots pushed at iterations 2 and 4.
    CHECK(pool.size() == 3);
    *final_nets = nets[0];
  };

  std::vector<IterationMetrics> ma, mb;
  PrompterNets na, nb;
  run_one(&ma, &na);
  run_one(&mb, &nb);
  for (size_t k = 0; k < ma.size(); ++k) {
    CHECK(ma[k].mean_reward == mb[k].mean_reward);
    CHECK(ma[k].policy_loss == mb[k].policy_loss);
  }
  CHECK(params_equal(na.policy, nb.policy));
}

TEST_CASE("training against a frozen opponent lifts the margin") {
  TrainSetup setup = competition_setup(11);
  setup.train.lr = 0.05;
  setup.train.ppo_epochs = 4;
  setup.train.batch_size = 32;
  CompetitionConfig comp;
  comp.pool_capacity = 1;     // the initial snapshot stays the only opponent
  comp.snapshot_interval = 1000000;

  std::vector<PrompterNets> nets = init_nets(setup);
  OpponentPool pool(comp.pool_capacity);
  pool.push(nets[0].policy);

  double first = 0.0;
  double last = 0.0;
  for (uint64_t it = 1; it <= 40; ++it) {
    const IterationMetrics m = self_play_iteration(setup, comp, nets[0], pool, it);
    if (it == 1) first = m.mean_reward;
    last = m.mean_reward;
  }
  CHECK(last > first + 0.1);
}
