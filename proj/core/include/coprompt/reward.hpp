#ifndef COPROMPT_CORE_REWARD_HPP_
#define COPROMPT_CORE_REWARD_HPP_

#include <map>
#include <span>
#include <vector>

#include "coprompt/types.hpp"

namespace coprompt {

enum class OracleKind { kCoverage, kSequence };

// Synthetic terminal reward definition. Coverage pays once per distinct
// target token present; sequence pays per matched prefix of an ordered
// target, matched as an in-order subsequence. Both are pure functions of the
// EOS-stripped continuation.
struct OracleSpec {
  OracleKind kind = OracleKind::kCoverage;
  std::map<TokenId, double> coverage_targets;  // token -> weight
  std::vector<TokenId> sequence_targets;
  double sequence_weight = 1.0;
  double dup_penalty = 0.0;
  double len_penalty = 0.0;
  double offtarget_penalty = 0.0;

  void validate(const Vocabulary& vocab) const;
};

struct RewardConfig {
  OracleSpec oracle;
  double alpha = 0.25;  // cooperation weight, training only
};

enum class RewardMode { kTrain, kEval };

// Scores the continuation y_clean (EOS already stripped). The initial prompt
// is part of the signature for oracle symmetry but the shipped oracles score
// the continuation only.
double task_reward(const Prompt& x, std::span<const TokenId> y_clean,
                   const OracleSpec& spec);

// Normalized entropy of subprompt length shares, in [0, 1]. Lengths count
// non-EOS tokens. Zero for n <= 1 or when every length is zero; 0*log 0 = 0.
double cooperation_reward(std::span<const int64_t> lengths, int n);

// Train mode: task + alpha * cooperation. Eval mode: task only.
double composite_reward(const Prompt& x, const Trajectory& traj,
                        const Vocabulary& vocab, const RewardConfig& cfg,
                        RewardMode mode);

}  // namespace coprompt

#endif  // COPROMPT_CORE_REWARD_HPP_
