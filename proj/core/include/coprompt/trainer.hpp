#ifndef COPROMPT_CORE_TRAINER_HPP_
#define COPROMPT_CORE_TRAINER_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "coprompt/critic.hpp"
#include "coprompt/game.hpp"
#include "coprompt/policy.hpp"
#include "coprompt/reward.hpp"
#include "coprompt/rng.hpp"

namespace coprompt {

struct TrainConfig {
  double gamma = 1.0;    // must stay 1: sparse terminal reward specialization
  double lambda = 0.95;
  double clip_eps = 0.2;
  int ppo_epochs = 4;
  int batch_size = 256;
  int minibatch_size = 128;
  double lr = 1e-5;
  double entropy_weight = 0.001;
  double grad_clip_norm = 1.0;  // <= 0 disables clipping
  bool normalize_advantages = true;

  void validate() const;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

struct AdamState {
  std::vector<ParamTensor> m;
  std::vector<ParamTensor> v;
  int64_t step = 0;

  static AdamState like(const std::vector<ParamTensor*>& params);
};

// In-place Adam update. `params` and `grads` are parallel tensor lists.
void adam_step(const std::vector<ParamTensor*>& params,
               const std::vector<ParamTensor*>& grads, AdamState& state,
               double lr);

double global_grad_norm(const std::vector<ParamTensor*>& grads);

// Scales all gradients so their global norm is at most max_norm. No-op for
// max_norm <= 0. Returns the pre-clip norm.
double clip_gradients(const std::vector<ParamTensor*>& grads, double max_norm);

struct GaeResult {
  std::vector<double> deltas;
  std::vector<double> advantages;
};

// Advantage estimation over one prompter's segment of sampled steps, with
// discount 1 and the episode's terminal reward at the segment end:
//   delta_j = values[j+1] - values[j]            (interior)
//   delta_last = terminal_reward - values[last]
//   A_j = sum_l lambda^l delta_{j+l}
// Empty input yields empty outputs.
GaeResult gae(std::span<const double> values, double terminal_reward,
              double lambda);

// Clipped surrogate for one step: -min(r A, clip(r, 1 +- eps) A) with
// r = exp(logp_new - logp_old).
double ppo_policy_loss(double logp_new, double logp_old, double advantage,
                       double clip_eps);

// d(ppo_policy_loss)/d(logp_new); zero when the active clip branch is flat.
double ppo_policy_loss_dlogp(double logp_new, double logp_old,
                             double advantage, double clip_eps);

struct IterationMetrics {
  double mean_reward = 0.0;       // training signal (composite / competitive)
  double mean_task_reward = 0.0;
  double mean_coop_reward = 0.0;
  double mean_tokens = 0.0;       // non-EOS tokens per episode
  std::vector<double> mean_lengths;  // per prompter
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

struct PrompterNets {
  PolicyParams policy;
  CriticParams critic;
  AdamState adam_policy;
  AdamState adam_critic;
};

// Everything a training iteration needs besides the mutable nets. The game
// config carries the fixed-decomposition cap when that ablation is active;
// `centralized_critic = false` feeds the critic an empty next-subprompt
// block instead of the realized one.
struct TrainSetup {
  GameConfig game;
  EncoderConfig encoder;
  RewardConfig reward;
  TrainConfig train;
  PromptSource prompts;
  bool centralized_critic = true;
  uint64_t run_seed = 0;

  void validate() const;
};

// Seed chain for every stochastic decision: each episode / shuffle draws
// from Rng(episode_seed(...)), so results depend only on counters.
inline uint64_t episode_seed(uint64_t run_seed, uint64_t stream,
                             uint64_t iteration, uint64_t index) {
  return mix_seed(mix_seed(mix_seed(run_seed, stream), iteration), index);
}

std::vector<PrompterNets> init_nets(const TrainSetup& setup);

// Sampling / greedy handles over a parameter snapshot. The referenced
// params must outlive the handle.
PolicyHandle make_sampling_handle(const PolicyParams& params,
                                  const EncoderConfig& cfg);
PolicyHandle make_greedy_handle(const PolicyParams& params,
                                const EncoderConfig& cfg);

// One PPO sample: a sampled (non-forced) step of one prompter.
struct StepSample {
  const Trajectory* traj = nullptr;
  int t = 0;  // 1-based; prefix = tokens[0 .. t-2]
  TokenId token = 0;
  int prompter = 0;
  std::span<const TokenId> next_block;  // critic extra input (raw, EOS ok)
  double logp_old = 0.0;
  double advantage = 0.0;
  double v_target = 0.0;
};

struct UpdateStats {
  double policy_loss_sum = 0.0;
  double value_loss_sum = 0.0;
  double entropy_sum = 0.0;
  int64_t count = 0;
};

// Batch advantage normalization: (A - mean) / (std + 1e-8). Affine with
// positive scale; skipped for fewer than two samples.
void normalize_advantages(std::span<StepSample> samples);

// Shared PPO/value update over one prompter's samples: optional advantage
// normalization, ppo_epochs shuffled minibatch passes, global-norm clipping,
// one Adam step per net per minibatch. Also used by the self-play baseline.
UpdateStats ppo_update_prompter(const TrainSetup& setup, PrompterNets& nets,
                                int prompter_index,
                                std::vector<StepSample>& samples,
                                uint64_t iteration);

// Rollout batch_size episodes with frozen parameters, score them, estimate
// advantages with each prompter's critic, then run the PPO/value updates.
IterationMetrics train_iteration(const TrainSetup& setup,
                                 std::vector<PrompterNets>& nets,
                                 uint64_t iteration);

}  // namespace coprompt

#endif  // COPROMPT_CORE_TRAINER_HPP_
