#include "coprompt/reward.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "coprompt/error.hpp"

namespace coprompt {

void OracleSpec::validate(const Vocabulary& vocab) const {
  auto check_target = [&](TokenId t) {
    if (!vocab.contains(t) || t == vocab.eos_id) {
      throw Error("structural",
                  "oracle target " + std::to_string(t) + " invalid");
    }
  };
  if (kind == OracleKind::kCoverage) {
    for (const auto& [token, weight] : coverage_targets) {
      check_target(token);
      if (!(weight > 0.0) || !std::isfinite(weight)) {
        throw Error("structural", "coverage weights must be positive finite");
      }
    }
  } else {
    for (TokenId t : sequence_targets) check_target(t);
    if (!std::isfinite(sequence_weight)) {
      throw Error("structural", "sequence weight must be finite");
    }
  }
  if (dup_penalty < 0.0 || len_penalty < 0.0 || offtarget_penalty < 0.0) {
    throw Error("structural", "penalties must be non-negative");
  }
}

double task_reward(const Prompt& x, std::span<const TokenId> y_clean,
                   const OracleSpec& spec) {
  (void)x;
  const double len_cost =
      spec.len_penalty * static_cast<double>(y_clean.size());
  if (spec.kind == OracleKind::kCoverage) {
    std::unordered_map<TokenId, int64_t> counts;
    int64_t offtarget = 0;
    for (TokenId t : y_clean) {
      if (spec.coverage_targets.count(t)) {
        ++counts[t];
      } else {
        ++offtarget;
      }
    }
    double score = 0.0;
    int64_t duplicates = 0;
    for (const auto& [token, weight] : spec.coverage_targets) {
      auto it = counts.find(token);
      if (it != counts.end()) {
        score += weight;
        duplicates += it->second - 1;
      }
    }
    return score - spec.dup_penalty * static_cast<double>(duplicates) -
           spec.offtarget_penalty * static_cast<double>(offtarget) - len_cost;
  }
  // Longest prefix of the target appearing in order: greedy subsequence scan.
  size_t matched = 0;
  for (TokenId t : y_clean) {
    if (matched < spec.sequence_targets.size() &&
        t == spec.sequence_targets[matched]) {
      ++matched;
    }
  }
  return spec.sequence_weight * static_cast<double>(matched) - len_cost;
}

double cooperation_reward(std::span<const int64_t> lengths, int n) {
  if (n <= 1) return 0.0;
  if (static_cast<int>(lengths.size()) != n) {
    throw Error("structural", "lengths size must equal n");
  }
  int64_t total = 0;
  for (int64_t l : lengths) {
    if (l < 0) throw Error("structural", "lengths must be non-negative");
    total += l;
  }
  if (total == 0) return 0.0;
  double entropy = 0.0;
  for (int64_t l : lengths) {
    if (l == 0) continue;  // 0 * log 0 := 0
    const double share = static_cast<double>(l) / static_cast<double>(total);
    entropy -= share * std::log(share);
  }
  return entropy / std::log(static_cast<double>(n));
}

double composite_reward(const Prompt& x, const Trajectory& traj,
                        const Vocabulary& vocab, const RewardConfig& cfg,
                        RewardMode mode) {
  const std::vector<TokenId> clean = clean_continuation(traj, vocab);
  const double task = task_reward(x, clean, cfg.oracle);
  if (mode == RewardMode::kEval || cfg.alpha == 0.0) return task;
  const auto lengths = subprompt_lengths(traj);
  return task +
         cfg.alpha * cooperation_reward(lengths, traj.num_prompters());
}

}  // namespace coprompt
