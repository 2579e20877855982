#include "coprompt/competition.hpp"

#include <cmath>

#include "coprompt/error.hpp"

namespace coprompt {

void CompetitionConfig::validate() const {
  if (pool_capacity < 1) throw Error("config", "pool_capacity must be >= 1");
  if (snapshot_interval < 1) {
    throw Error("config", "snapshot_interval must be >= 1");
  }
}

OpponentPool::OpponentPool(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw Error("config", "pool capacity must be >= 1");
}

void OpponentPool::push(const PolicyParams& params) {
  if (static_cast<int>(ring_.size()) < capacity_) {
    ring_.push_back(params);
  } else {
    ring_[pushed_ % static_cast<uint64_t>(capacity_)] = params;
  }
  ++pushed_;
}

const PolicyParams& OpponentPool::sample(Rng& rng) const {
  if (ring_.empty()) throw Error("usage", "opponent pool is empty");
  return ring_[rng.next_below(static_cast<uint32_t>(ring_.size()))];
}

OpponentPool OpponentPool::restore(int capacity,
                                   std::vector<PolicyParams> ring,
                                   uint64_t pushed) {
  OpponentPool pool(capacity);
  pool.ring_ = std::move(ring);
  pool.pushed_ = pushed;
  return pool;
}

double competitive_reward(double r_i, double r_j) { return r_i - r_j; }

IterationMetrics self_play_iteration(const TrainSetup& setup,
                                     const CompetitionConfig& comp,
                                     PrompterNets& agent, OpponentPool& pool,
                                     uint64_t iteration) {
  setup.validate();
  comp.validate();
  if (setup.game.n != 1) {
    throw Error("config", "self-play uses single-prompter episodes");
  }
  if (pool.size() == 0) throw Error("usage", "opponent pool not seeded");

  const int batch = setup.train.batch_size;
  const Vocabulary& vocab = setup.game.vocab;
  const PolicyHandle agent_handle =
      make_sampling_handle(agent.policy, setup.encoder);

  std::vector<Trajectory> trajs;
  std::vector<Trajectory> opp_trajs;
  trajs.reserve(static_cast<size_t>(batch));
  opp_trajs.reserve(static_cast<size_t>(batch));

  IterationMetrics metrics;
  metrics.mean_lengths.assign(1, 0.0);

  for (int e = 0; e < batch; ++e) {
    Rng ep_rng(episode_seed(setup.run_seed, streams::kRollout, iteration,
                            static_cast<uint64_t>(e)));
    Rng prompt_rng(episode_seed(setup.run_seed, streams::kPrompt, iteration,
                                static_cast<uint64_t>(e)));
    Rng opp_rng(episode_seed(setup.run_seed, streams::kOpponent, iteration,
                             static_cast<uint64_t>(e)));
    const uint64_t episode_index =
        iteration * static_cast<uint64_t>(batch) + static_cast<uint64_t>(e);
    const Prompt& prompt = setup.prompts.select(episode_index, prompt_rng);

    Trajectory traj =
        run_episode({&agent_handle, 1}, prompt, setup.game, ep_rng);

    const PolicyParams& opponent = pool.sample(opp_rng);
    const PolicyHandle opp_handle =
        make_sampling_handle(opponent, setup.encoder);
    Trajectory opp_traj =
        run_episode({&opp_handle, 1}, prompt, setup.game, opp_rng);

    const double r_agent = task_reward(
        prompt, clean_continuation(traj, vocab), setup.reward.oracle);
    const double r_opp = task_reward(
        prompt, clean_continuation(opp_traj, vocab), setup.reward.oracle);
    traj.reward = competitive_reward(r_agent, r_opp);
    if (!std::isfinite(traj.reward)) {
      throw Error("numeric",
                  "non-finite reward (seed=" + std::to_string(setup.run_seed) +
                      " episode=" + std::to_string(e) + ")");
    }

    const auto lengths = subprompt_lengths(traj);
    metrics.mean_reward += traj.reward;
    metrics.mean_task_reward += r_agent;
    metrics.mean_tokens += static_cast<double>(lengths[0]);
    metrics.mean_lengths[0] += static_cast<double>(lengths[0]);

    trajs.push_back(std::move(traj));
    opp_trajs.push_back(std::move(opp_traj));
  }
  const double inv_batch = 1.0 / static_cast<double>(batch);
  metrics.mean_reward *= inv_batch;
  metrics.mean_task_reward *= inv_batch;
  metrics.mean_tokens *= inv_batch;
  metrics.mean_lengths[0] *= inv_batch;

  // GAE with the opponent-conditioned critic, then the shared PPO update.
  std::vector<StepSample> samples;
  for (int e = 0; e < batch; ++e) {
    Trajectory& traj = trajs[e];
    const Boundary b = traj.boundaries[0];
    int seg_end = b.end;
    while (seg_end >= b.begin && traj.forced_eos[seg_end - 1]) --seg_end;
    if (seg_end < b.begin) continue;

    const std::span<const TokenId> opp_block(opp_trajs[e].tokens.data(),
                                             opp_trajs[e].tokens.size());
    std::vector<double> seg_values;
    for (int t = b.begin; t <= seg_end; ++t) {
      const std::span<const TokenId> prefix(traj.tokens.data(),
                                            static_cast<size_t>(t - 1));
      const double v = critic_value(traj.prompt, prefix, opp_block, 0, t,
                                    agent.critic, setup.encoder, vocab.eos_id);
      seg_values.push_back(v);
      traj.values[t - 1] = v;
    }
    const GaeResult g = gae(seg_values, traj.reward, setup.train.lambda);
    for (int t = b.begin; t <= seg_end; ++t) {
      const size_t j = static_cast<size_t>(t - b.begin);
      StepSample s;
      s.traj = &traj;
      s.t = t;
      s.token = traj.tokens[t - 1];
      s.prompter = 0;
      s.next_block = opp_block;
      s.logp_old = traj.logprobs[t - 1];
      s.advantage = g.advantages[j];
      s.v_target = g.advantages[j] + seg_values[j];
      samples.push_back(s);
    }
  }

  const UpdateStats stats =
      ppo_update_prompter(setup, agent, 0, samples, iteration);
  if (stats.count > 0) {
    metrics.policy_loss = stats.policy_loss_sum / static_cast<double>(stats.count);
    metrics.value_loss = stats.value_loss_sum / static_cast<double>(stats.count);
    metrics.entropy = stats.entropy_sum / static_cast<double>(stats.count);
  }

  if (iteration % static_cast<uint64_t>(comp.snapshot_interval) == 0) {
    pool.push(agent.policy);
  }
  return metrics;
}

}  // namespace coprompt
