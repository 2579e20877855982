#include "coprompt/game.hpp"

#include "coprompt/error.hpp"

namespace coprompt {

void GameConfig::validate() const {
  vocab.validate();
  if (n < 1) throw Error("structural", "need at least one prompter");
  if (token_limit < 0) throw Error("structural", "token_limit must be >= 0");
  if (per_turn_cap < 0) throw Error("structural", "per_turn_cap must be >= 0");
}

GameState initial_state(Prompt prompt, const GameConfig& cfg) {
  prompt.validate(cfg.vocab);
  GameState s;
  s.prompt = std::move(prompt);
  return s;
}

GameState step(const GameState& state, TokenId token, const GameConfig& cfg) {
  if (state.terminal(cfg)) {
    throw Error("usage", "step() on a terminal game state");
  }
  if (!cfg.vocab.contains(token)) {
    throw Error("usage", "token " + std::to_string(token) + " out of range");
  }
  GameState next = state;
  next.emitted.push_back(token);
  next.timestep = state.timestep + 1;
  if (token == cfg.vocab.eos_id) next.active_index = state.active_index + 1;
  return next;
}

Trajectory run_episode(std::span<const PolicyHandle> policies,
                       const Prompt& prompt, const GameConfig& cfg, Rng& rng) {
  cfg.validate();
  if (static_cast<int>(policies.size()) != cfg.n) {
    throw Error("usage", "need exactly one policy per prompter");
  }

  GameState state = initial_state(prompt, cfg);
  Trajectory traj;
  traj.prompt = state.prompt;
  traj.boundaries.resize(cfg.n);
  int turn_begin = 1;
  int turn_sampled = 0;

  while (!state.terminal(cfg)) {
    const int i = state.active_index;
    const int t = state.timestep;
    const bool over_limit = t > cfg.token_limit;
    const bool over_cap = cfg.per_turn_cap > 0 && turn_sampled >= cfg.per_turn_cap;

    TokenId token;
    double logprob;
    bool forced;
    if (over_limit || over_cap) {
      token = cfg.vocab.eos_id;
      logprob = 0.0;
      forced = true;
    } else {
      std::tie(token, logprob) =
          policies[i].act(state.prompt, state.emitted, i, t, rng);
      if (!cfg.vocab.contains(token)) {
        throw Error("structural",
                    "policy emitted out-of-range token " + std::to_string(token));
      }
      forced = false;
      ++turn_sampled;
    }

    state = step(state, token, cfg);
    traj.tokens.push_back(token);
    traj.logprobs.push_back(logprob);
    traj.forced_eos.push_back(forced ? 1 : 0);
    if (token == cfg.vocab.eos_id) {
      traj.boundaries[i] = Boundary{turn_begin, t};
      turn_begin = t + 1;
      turn_sampled = 0;
    }
  }

  traj.values.assign(traj.tokens.size(), 0.0);
  return traj;
}

}  // namespace coprompt
