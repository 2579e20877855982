#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "coprompt/reward.hpp"
#include "coprompt/rng.hpp"

using namespace coprompt;

namespace {

constexpr TokenId kEos = 9;
const Vocabulary kVocab{10, kEos};

OracleSpec coverage_spec() {
  OracleSpec spec;
  spec.kind = OracleKind::kCoverage;
  spec.coverage_targets = {{2, 0.6}, {5, 0.4}};
  spec.dup_penalty = 0.1;
  spec.offtarget_penalty = 0.0;
  spec.len_penalty = 0.05;
  return spec;
}

Trajectory traj_from(std::vector<TokenId> tokens) {
  Trajectory traj;
  traj.tokens = std::move(tokens);
  int begin = 1;
  for (size_t k = 0; k < traj.tokens.size(); ++k) {
    if (traj.tokens[k] == kEos) {
      traj.boundaries.push_back(Boundary{begin, static_cast<int>(k + 1)});
      begin = static_cast<int>(k + 2);
    }
  }
  traj.logprobs.assign(traj.tokens.size(), 0.0);
  traj.values.assign(traj.tokens.size(), 0.0);
  traj.forced_eos.assign(traj.tokens.size(), 0);
  return traj;
}

}  // namespace

TEST_CASE("coverage oracle worked examples") {
  const OracleSpec spec = coverage_spec();
  const Prompt x;
  CHECK(task_reward(x, std::vector<TokenId>{2, 5}, spec) ==
        doctest::Approx(0.9).epsilon(1e-12));
  CHECK(task_reward(x, std::vector<TokenId>{2, 2, 5}, spec) ==
        doctest::Approx(0.75).epsilon(1e-12));
  CHECK(task_reward(x, std::vector<TokenId>{}, spec) == 0.0);
}

TEST_CASE("coverage is permutation invariant, sequence is not") {
  OracleSpec cov = coverage_spec();
  cov.offtarget_penalty = 0.07;
  const Prompt x;
  std::vector<TokenId> tokens{2, 5, 1, 5, 3};
  const double base = task_reward(x, tokens, cov);
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    for (size_t k = tokens.size(); k > 1; --k) {
      std::swap(tokens[k - 1], tokens[rng.next_below(static_cast<uint32_t>(k))]);
    }
    CHECK(task_reward(x, tokens, cov) == base);
  }

  OracleSpec seq;
  seq.kind = OracleKind::kSequence;
  seq.sequence_targets = {1, 2, 3};
  seq.sequence_weight = 1.0;
  CHECK(task_reward(x, std::vector<TokenId>{1, 2, 3}, seq) == 3.0);
  CHECK(task_reward(x, std::vector<TokenId>{3, 2, 1}, seq) == 1.0);
  CHECK(task_reward(x, std::vector<TokenId>{1, 7, 2, 7, 3}, seq) == 3.0);
  CHECK(task_reward(x, std::vector<TokenId>{2, 3}, seq) == 0.0);
}

TEST_CASE("sequence oracle pays the matched prefix minus length cost") {
  OracleSpec seq;
  seq.kind = OracleKind::kSequence;
  seq.sequence_targets = {4, 1};
  seq.sequence_weight = 0.5;
  seq.len_penalty = 0.1;
  CHECK(task_reward(Prompt{}, std::vector<TokenId>{4, 1, 8}, seq) ==
        doctest::Approx(1.0 - 0.3).epsilon(1e-12));
}

TEST_CASE("cooperation reward worked examples") {
  const std::vector<int64_t> even{5, 5};
  CHECK(cooperation_reward(even, 2) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<int64_t> lopsided{10, 0};
  CHECK(cooperation_reward(lopsided, 2) == 0.0);
  // Direct formula: -(0.75 ln 0.75 + 0.25 ln 0.25) / ln 2.
  const std::vector<int64_t> uneven{3, 1};
  CHECK(cooperation_reward(uneven, 2) ==
        doctest::Approx(0.811278).epsilon(1e-6));
  const double direct =
      -(0.75 * std::log(0.75) + 0.25 * std::log(0.25)) / std::log(2.0);
  CHECK(cooperation_reward(uneven, 2) == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("cooperation reward properties") {
  Rng rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(5));
    std::vector<int64_t> lengths;
    bool all_equal_positive = true;
    for (int i = 0; i < n; ++i) {
      lengths.push_back(static_cast<int64_t>(rng.next_below(8)));
    }
    for (int i = 0; i < n; ++i) {
      if (lengths[i] != lengths[0] || lengths[i] == 0) {
        all_equal_positive = false;
      }
    }
    const double h = cooperation_reward(lengths, n);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0 + 1e-12);
    if (n > 1) {
      CHECK((h == doctest::Approx(1.0).epsilon(1e-12)) == all_equal_positive);
      // Permutation invariance.
      std::vector<int64_t> shuffled = lengths;
      std::reverse(shuffled.begin(), shuffled.end());
      CHECK(cooperation_reward(shuffled, n) == doctest::Approx(h).epsilon(1e-12));
    } else {
      CHECK(h == 0.0);
    }
  }
  const std::vector<int64_t> zeros{0, 0, 0};
  CHECK(cooperation_reward(zeros, 3) == 0.0);
}

TEST_CASE("composite reward applies alpha only in train mode") {
  RewardConfig cfg;
  cfg.oracle = coverage_spec();
  cfg.alpha = 0.25;
  // Lengths (1,1): task 0.9, cooperation 1.0.
  const Trajectory traj = traj_from({2, kEos, 5, kEos});
  const Prompt x;
  CHECK(composite_reward(x, traj, kVocab, cfg, RewardMode::kTrain) ==
        doctest::Approx(1.15).epsilon(1e-12));
  CHECK(composite_reward(x, traj, kVocab, cfg, RewardMode::kEval) ==
        doctest::Approx(0.9).epsilon(1e-12));
  cfg.alpha = 0.0;
  CHECK(composite_reward(x, traj, kVocab, cfg, RewardMode::kTrain) ==
        composite_reward(x, traj, kVocab, cfg, RewardMode::kEval));
}

TEST_CASE("reward is a pure function") {
  const OracleSpec spec = coverage_spec();
  const std::vector<TokenId> y{2, 5, 5, 1};
  const double first = task_reward(Prompt{}, y, spec);
  for (int i = 0; i < 10; ++i) {
    CHECK(task_reward(Prompt{}, y, spec) == first);
  }
}
