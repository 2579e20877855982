#include "coprompt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coprompt/error.hpp"

namespace coprompt {

void TrainConfig::validate() const {
  if (gamma != 1.0) {
    throw Error("config",
                "gamma must be 1.0 (terminal-only reward specialization)");
  }
  if (!(lambda > 0.0) || lambda > 1.0) {
    throw Error("config", "lambda must be in (0, 1]");
  }
  if (!(clip_eps > 0.0)) throw Error("config", "clip_eps must be > 0");
  if (ppo_epochs < 0) throw Error("config", "ppo_epochs must be >= 0");
  if (batch_size < 1) throw Error("config", "batch_size must be >= 1");
  if (minibatch_size < 1) throw Error("config", "minibatch_size must be >= 1");
  if (lr < 0.0) throw Error("config", "lr must be >= 0");
  if (entropy_weight < 0.0) {
    throw Error("config", "entropy_weight must be >= 0");
  }
}

void TrainSetup::validate() const {
  game.validate();
  encoder.validate();
  train.validate();
  reward.oracle.validate(game.vocab);
  prompts.validate(game.vocab);
  if (encoder.n_prompters != game.n) {
    throw Error("config", "encoder n_prompters must match game n");
  }
}

AdamState AdamState::like(const std::vector<ParamTensor*>& params) {
  AdamState s;
  for (const ParamTensor* p : params) {
    s.m.push_back(ParamTensor::zeros(p->name, p->shape));
    s.v.push_back(ParamTensor::zeros(p->name, p->shape));
  }
  return s;
}

void adam_step(const std::vector<ParamTensor*>& params,
               const std::vector<ParamTensor*>& grads, AdamState& state,
               double lr) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw Error("structural", "adam tensor list mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  for (size_t k = 0; k < params.size(); ++k) {
    ParamTensor& theta = *params[k];
    const ParamTensor& g = *grads[k];
    ParamTensor& m = state.m[k];
    ParamTensor& v = state.v[k];
    for (size_t j = 0; j < theta.data.size(); ++j) {
      m.data[j] = kAdamBeta1 * m.data[j] + (1.0 - kAdamBeta1) * g.data[j];
      v.data[j] =
          kAdamBeta2 * v.data[j] + (1.0 - kAdamBeta2) * g.data[j] * g.data[j];
      const double mhat = m.data[j] / bc1;
      const double vhat = v.data[j] / bc2;
      theta.data[j] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
    }
  }
}

double global_grad_norm(const std::vector<ParamTensor*>& grads) {
  double sq = 0.0;
  for (const ParamTensor* g : grads) {
    for (double x : g->data) sq += x * x;
  }
  return std::sqrt(sq);
}

double clip_gradients(const std::vector<ParamTensor*>& grads,
                      double max_norm) {
  const double norm = global_grad_norm(grads);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (ParamTensor* g : grads) {
      for (double& x : g->data) x *= scale;
    }
  }
  return norm;
}

GaeResult gae(std::span<const double> values, double terminal_reward,
              double lambda) {
  GaeResult out;
  const size_t len = values.size();
  if (len == 0) return out;
  out.deltas.resize(len);
  out.advantages.resize(len);
  for (size_t j = 0; j + 1 < len; ++j) {
    out.deltas[j] = values[j + 1] - values[j];
  }
  out.deltas[len - 1] = terminal_reward - values[len - 1];
  out.advantages[len - 1] = out.deltas[len - 1];
  for (size_t j = len - 1; j-- > 0;) {
    out.advantages[j] = out.deltas[j] + lambda * out.advantages[j + 1];
  }
  return out;
}

double ppo_policy_loss(double logp_new, double logp_old, double advantage,
                       double clip_eps) {
  const double r = std::exp(logp_new - logp_old);
  const double unclipped = r * advantage;
  const double clipped =
      std::clamp(r, 1.0 - clip_eps, 1.0 + clip_eps) * advantage;
  return -std::min(unclipped, clipped);
}

double ppo_policy_loss_dlogp(double logp_new, double logp_old,
                             double advantage, double clip_eps) {
  const double r = std::exp(logp_new - logp_old);
  const double unclipped = r * advantage;
  const double clipped =
      std::clamp(r, 1.0 - clip_eps, 1.0 + clip_eps) * advantage;
  if (unclipped <= clipped) return -advantage * r;
  const bool interior = r > 1.0 - clip_eps && r < 1.0 + clip_eps;
  return interior ? -advantage * r : 0.0;
}

std::vector<PrompterNets> init_nets(const TrainSetup& setup) {
  setup.validate();
  std::vector<PrompterNets> nets;
  nets.reserve(static_cast<size_t>(setup.game.n));
  const uint64_t init_seed = mix_seed(setup.run_seed, streams::kInit);
  for (int i = 0; i < setup.game.n; ++i) {
    Rng policy_rng(mix_seed(init_seed, static_cast<uint64_t>(2 * i)));
    Rng critic_rng(mix_seed(init_seed, static_cast<uint64_t>(2 * i + 1)));
    PrompterNets n;
    n.policy = init_policy_params(setup.game.vocab, setup.encoder, policy_rng);
    n.critic = init_critic_params(setup.game.vocab, setup.encoder, critic_rng);
    n.adam_policy = AdamState::like(n.policy.tensors());
    n.adam_critic = AdamState::like(n.critic.tensors());
    nets.push_back(std::move(n));
  }
  return nets;
}

PolicyHandle make_sampling_handle(const PolicyParams& params,
                                  const EncoderConfig& cfg) {
  return PolicyHandle{
      [&params, cfg](const Prompt& x, std::span<const TokenId> prefix, int i,
                     int t, Rng& rng) {
        const PolicyForward fwd = policy_forward(x, prefix, i, t, params, cfg);
        return sample_and_logprob(fwd.logits, rng);
      }};
}

PolicyHandle make_greedy_handle(const PolicyParams& params,
                                const EncoderConfig& cfg) {
  return PolicyHandle{
      [&params, cfg](const Prompt& x, std::span<const TokenId> prefix, int i,
                     int t, Rng&) {
        const PolicyForward fwd = policy_forward(x, prefix, i, t, params, cfg);
        return greedy_and_logprob(fwd.logits);
      }};
}

namespace {

// Fisher-Yates with the shuffle substream.
void shuffle_indices(std::vector<size_t>& idx, Rng& rng) {
  for (size_t k = idx.size(); k > 1; --k) {
    const size_t j = rng.next_below(static_cast<uint32_t>(k));
    std::swap(idx[k - 1], idx[j]);
  }
}

}  // namespace

void normalize_advantages(std::span<StepSample> samples) {
  if (samples.size() < 2) return;
  double mean = 0.0;
  for (const StepSample& s : samples) mean += s.advantage;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (const StepSample& s : samples) {
    const double d = s.advantage - mean;
    var += d * d;
  }
  const double std = std::sqrt(var / static_cast<double>(samples.size()));
  for (StepSample& s : samples) {
    s.advantage = (s.advantage - mean) / (std + 1e-8);
  }
}

UpdateStats ppo_update_prompter(const TrainSetup& setup, PrompterNets& nets,
                                int prompter_index,
                                std::vector<StepSample>& samples,
                                uint64_t iteration) {
  UpdateStats stats;
  if (samples.empty()) return stats;
  const TrainConfig& tc = setup.train;
  const TokenId eos = setup.game.vocab.eos_id;

  if (tc.normalize_advantages) normalize_advantages(samples);

  std::vector<size_t> order(samples.size());
  std::iota(order.begin(), order.end(), size_t{0});

  PolicyParams grad_policy = zeros_like(nets.policy);
  CriticParams grad_critic = zeros_like(nets.critic);
  std::vector<double> grad_z;

  for (int epoch = 0; epoch < tc.ppo_epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(
        episode_seed(setup.run_seed, streams::kShuffle, iteration,
                     static_cast<uint64_t>(epoch)),
        static_cast<uint64_t>(prompter_index)));
    shuffle_indices(order, shuffle_rng);

    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(tc.minibatch_size)) {
      const size_t stop =
          std::min(order.size(), start + static_cast<size_t>(tc.minibatch_size));
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (ParamTensor* t : grad_policy.tensors()) t->fill(0.0);
      for (ParamTensor* t : grad_critic.tensors()) t->fill(0.0);
      double mb_policy_loss = 0.0;
      double mb_value_loss = 0.0;

      for (size_t k = start; k < stop; ++k) {
        const StepSample& s = samples[order[k]];
        const Prompt& x = s.traj->prompt;
        const std::span<const TokenId> prefix(
            s.traj->tokens.data(), static_cast<size_t>(s.t - 1));

        const PolicyForward fwd = policy_forward(x, prefix, s.prompter, s.t,
                                                 nets.policy, setup.encoder);
        const std::vector<double> probs = softmax(fwd.logits);
        const double logp_new = log_softmax_at(fwd.logits, s.token);
        const double ent = entropy_of(probs);
        const double pg_loss =
            ppo_policy_loss(logp_new, s.logp_old, s.advantage, tc.clip_eps);
        const double dldlogp = ppo_policy_loss_dlogp(logp_new, s.logp_old,
                                                     s.advantage, tc.clip_eps);

        grad_z.assign(probs.size(), 0.0);
        for (size_t j = 0; j < probs.size(); ++j) {
          const double dlogp_dz = (static_cast<TokenId>(j) == s.token ? 1.0 : 0.0) - probs[j];
          const double dent_dz =
              probs[j] > 0.0 ? -probs[j] * (std::log(probs[j]) + ent) : 0.0;
          grad_z[j] = scale * (dldlogp * dlogp_dz - tc.entropy_weight * dent_dz);
        }
        policy_backward(x, prefix, fwd, grad_z, nets.policy, setup.encoder,
                        grad_policy);

        const ValueGradResult vg =
            value_grad(x, prefix, s.next_block, s.prompter, s.t, s.v_target,
                       nets.critic, setup.encoder, eos, grad_critic, scale);

        const double v_diff = vg.value - s.v_target;
        mb_policy_loss += pg_loss - tc.entropy_weight * ent;
        mb_value_loss += v_diff * v_diff;
        stats.policy_loss_sum += pg_loss;
        stats.value_loss_sum += v_diff * v_diff;
        stats.entropy_sum += ent;
        stats.count += 1;
      }

      if (!std::isfinite(mb_policy_loss) || !std::isfinite(mb_value_loss)) {
        throw Error("numeric",
                    "non-finite loss (seed=" + std::to_string(setup.run_seed) +
                        " iteration=" + std::to_string(iteration) +
                        " prompter=" + std::to_string(prompter_index) + ")");
      }

      clip_gradients(grad_policy.tensors(), tc.grad_clip_norm);
      adam_step(nets.policy.tensors(), grad_policy.tensors(),
                nets.adam_policy, tc.lr);
      clip_gradients(grad_critic.tensors(), tc.grad_clip_norm);
      adam_step(nets.critic.tensors(), grad_critic.tensors(),
                nets.adam_critic, tc.lr);
    }
  }
  return stats;
}

IterationMetrics train_iteration(const TrainSetup& setup,
                                 std::vector<PrompterNets>& nets,
                                 uint64_t iteration) {
  setup.validate();
  const int n = setup.game.n;
  if (static_cast<int>(nets.size()) != n) {
    throw Error("usage", "need one net pair per prompter");
  }
  const int batch = setup.train.batch_size;
  const Vocabulary& vocab = setup.game.vocab;

  // Rollout with frozen parameters.
  std::vector<PolicyHandle> handles;
  handles.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    handles.push_back(make_sampling_handle(nets[i].policy, setup.encoder));
  }
  std::vector<Trajectory> trajs;
  trajs.reserve(static_cast<size_t>(batch));
  for (int e = 0; e < batch; ++e) {
    Rng ep_rng(episode_seed(setup.run_seed, streams::kRollout, iteration,
                            static_cast<uint64_t>(e)));
    Rng prompt_rng(episode_seed(setup.run_seed, streams::kPrompt, iteration,
                                static_cast<uint64_t>(e)));
    const uint64_t episode_index =
        iteration * static_cast<uint64_t>(batch) + static_cast<uint64_t>(e);
    const Prompt& prompt = setup.prompts.select(episode_index, prompt_rng);
    Trajectory traj = run_episode(handles, prompt, setup.game, ep_rng);
    traj.reward =
        composite_reward(prompt, traj, vocab, setup.reward, RewardMode::kTrain);
    if (!std::isfinite(traj.reward)) {
      throw Error("numeric",
                  "non-finite reward (seed=" + std::to_string(setup.run_seed) +
                      " episode=" + std::to_string(e) + ")");
    }
    trajs.push_back(std::move(traj));
  }

  IterationMetrics metrics;
  metrics.mean_lengths.assign(static_cast<size_t>(n), 0.0);
  for (const Trajectory& traj : trajs) {
    const auto lengths = subprompt_lengths(traj);
    const double task = composite_reward(traj.prompt, traj, vocab,
                                         setup.reward, RewardMode::kEval);
    metrics.mean_reward += traj.reward;
    metrics.mean_task_reward += task;
    metrics.mean_coop_reward += cooperation_reward(lengths, n);
    for (int i = 0; i < n; ++i) {
      metrics.mean_lengths[i] += static_cast<double>(lengths[i]);
      metrics.mean_tokens += static_cast<double>(lengths[i]);
    }
  }
  const double inv_batch = 1.0 / static_cast<double>(batch);
  metrics.mean_reward *= inv_batch;
  metrics.mean_task_reward *= inv_batch;
  metrics.mean_coop_reward *= inv_batch;
  metrics.mean_tokens *= inv_batch;
  for (double& l : metrics.mean_lengths) l *= inv_batch;

  // Per-prompter advantage estimation with the (frozen) critics, then PPO.
  UpdateStats total;
  for (int i = 0; i < n; ++i) {
    std::vector<StepSample> samples;
    for (Trajectory& traj : trajs) {
      const Boundary b = traj.boundaries[i];
      // Sampled steps only; a trailing forced EOS ends the segment and the
      // terminal-reward delta applies at the last sampled step.
      int seg_end = b.end;
      while (seg_end >= b.begin && traj.forced_eos[seg_end - 1]) --seg_end;
      if (seg_end < b.begin) continue;

      std::span<const TokenId> next_block;
      if (setup.centralized_critic && i + 1 < n) {
        const Boundary nb = traj.boundaries[i + 1];
        next_block = std::span<const TokenId>(
            traj.tokens.data() + (nb.begin - 1),
            static_cast<size_t>(nb.end - nb.begin + 1));
      }

      std::vector<double> seg_values;
      for (int t = b.begin; t <= seg_end; ++t) {
        const std::span<const TokenId> prefix(traj.tokens.data(),
                                              static_cast<size_t>(t - 1));
        const double v = critic_value(traj.prompt, prefix, next_block, i, t,
                                      nets[i].critic, setup.encoder,
                                      vocab.eos_id);
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
        s.prompter = i;
        s.next_block = next_block;
        s.logp_old = traj.logprobs[t - 1];
        s.advantage = g.advantages[j];
        s.v_target = g.advantages[j] + seg_values[j];
        samples.push_back(s);
      }
    }
    const UpdateStats stats =
        ppo_update_prompter(setup, nets[i], i, samples, iteration);
    total.policy_loss_sum += stats.policy_loss_sum;
    total.value_loss_sum += stats.value_loss_sum;
    total.entropy_sum += stats.entropy_sum;
    total.count += stats.count;
  }

  if (total.count > 0) {
    metrics.policy_loss = total.policy_loss_sum / static_cast<double>(total.count);
    metrics.value_loss = total.value_loss_sum / static_cast<double>(total.count);
    metrics.entropy = total.entropy_sum / static_cast<double>(total.count);
  }
  return metrics;
}

}  // namespace coprompt
