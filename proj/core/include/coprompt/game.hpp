#ifndef COPROMPT_CORE_GAME_HPP_
#define COPROMPT_CORE_GAME_HPP_

#include <functional>
#include <span>
#include <utility>

#include "coprompt/rng.hpp"
#include "coprompt/types.hpp"

namespace coprompt {

// Turn-taking token composition game. `token_limit` is the global budget T:
// sampling happens only while timestep <= T, after which every remaining
// step is a forced EOS. `per_turn_cap` > 0 additionally forces a prompter's
// EOS once it has sampled that many tokens in its turn (the fixed
// decomposition ablation, cap = floor(T / n)); 0 leaves turn length learned.
struct GameConfig {
  int n = 1;
  int token_limit = 0;
  Vocabulary vocab;
  int per_turn_cap = 0;

  void validate() const;
};

// Prompter indices are 0-based in code; active_index == n means terminal.
// Timesteps are 1-based: timestep == |emitted| + 1.
struct GameState {
  Prompt prompt;
  std::vector<TokenId> emitted;
  int active_index = 0;
  int timestep = 1;

  bool terminal(const GameConfig& cfg) const { return active_index >= cfg.n; }
};

GameState initial_state(Prompt prompt, const GameConfig& cfg);

// Appends the token and advances the clock; EOS passes the turn. Stepping a
// terminal state throws Error("usage").
GameState step(const GameState& state, TokenId token, const GameConfig& cfg);

// A policy handle returns (token, behavior logprob) for the active prompter.
// Neural policies wrap softmax sampling; tests may script anything.
struct PolicyHandle {
  std::function<std::pair<TokenId, double>(
      const Prompt& x, std::span<const TokenId> prefix, int prompter_index,
      int timestep, Rng& rng)>
      act;
};

// Plays one full episode. Forced EOS steps record logprob 0 and a set flag.
// The returned trajectory has zeroed values and reward; the reward module
// and trainer fill those in.
Trajectory run_episode(std::span<const PolicyHandle> policies,
                       const Prompt& prompt, const GameConfig& cfg, Rng& rng);

}  // namespace coprompt

#endif  // COPROMPT_CORE_GAME_HPP_
