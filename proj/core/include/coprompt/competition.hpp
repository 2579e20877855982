#ifndef COPROMPT_CORE_COMPETITION_HPP_
#define COPROMPT_CORE_COMPETITION_HPP_

#include <cstdint>
#include <vector>

#include "coprompt/trainer.hpp"

namespace coprompt {

struct CompetitionConfig {
  int pool_capacity = 8;
  int snapshot_interval = 10;  // iterations between snapshots

  void validate() const;
};

// Ring buffer of frozen policy snapshots ("former copies"). Seeded with the
// initial parameters before training starts, so sampling never fails.
class OpponentPool {
 public:
  explicit OpponentPool(int capacity);

  void push(const PolicyParams& params);
  const PolicyParams& sample(Rng& rng) const;

  int size() const { return static_cast<int>(ring_.size()); }
  int capacity() const { return capacity_; }
  uint64_t pushed_count() const { return pushed_; }
  const PolicyParams& snapshot(int slot) const { return ring_[slot]; }

  // Checkpoint restore: ring content in slot order plus the push counter.
  static OpponentPool restore(int capacity, std::vector<PolicyParams> ring,
                              uint64_t pushed);

 private:
  int capacity_;
  std::vector<PolicyParams> ring_;
  uint64_t pushed_ = 0;
};

// Margin of prompter i's prompt over prompter j's: r_i - r_j. Antisymmetric.
double competitive_reward(double r_i, double r_j);

// One self-play iteration: the agent writes full prompts alone (n = 1
// mechanics), a pool opponent writes a rival prompt on the same x, and the
// agent is trained on the reward margin with a critic that conditions on the
// opponent's prompt. Opponents are frozen and contribute no gradients.
// Pushes a snapshot after the update when the iteration hits the schedule.
IterationMetrics self_play_iteration(const TrainSetup& setup,
                                     const CompetitionConfig& comp,
                                     PrompterNets& agent, OpponentPool& pool,
                                     uint64_t iteration);

}  // namespace coprompt

#endif  // COPROMPT_CORE_COMPETITION_HPP_
