#ifndef COPROMPT_CORE_TYPES_HPP_
#define COPROMPT_CORE_TYPES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "coprompt/rng.hpp"

namespace coprompt {

using TokenId = int32_t;

// Dense integer token universe with one reserved end-of-sequence id.
// There is no string vocabulary at this layer; token ids are the tokens.
struct Vocabulary {
  int32_t size = 0;
  TokenId eos_id = 0;

  bool contains(TokenId t) const { return t >= 0 && t < size; }
  int32_t content_size() const { return size - 1; }

  // Throws Error("structural") unless size >= 2 and 0 <= eos_id < size.
  void validate() const;
};

// Initial prompt x. Never contains the EOS token.
struct Prompt {
  std::vector<TokenId> tokens;

  void validate(const Vocabulary& vocab) const;
};

enum class PromptSampling { kCyclic, kUniform };

// Finite prompt distribution p(x). Cyclic selection keys off the caller's
// episode counter so the source itself stays stateless.
struct PromptSource {
  std::vector<Prompt> prompts;
  PromptSampling sampling = PromptSampling::kCyclic;

  const Prompt& select(uint64_t episode_index, Rng& rng) const;
  void validate(const Vocabulary& vocab) const;
};

// Timestep span of one prompter's subprompt, 1-based inclusive. The token at
// `end` is that prompter's EOS.
struct Boundary {
  int begin = 0;
  int end = 0;
};

// One completed episode. tokens[k] was emitted at timestep k+1. logprobs and
// values always have the same length as tokens; values start zeroed and are
// filled by the trainer (the critic needs the completed episode). Forced EOS
// steps carry logprob 0 and a set flag; they are never learnable actions.
struct Trajectory {
  Prompt prompt;
  std::vector<TokenId> tokens;
  std::vector<Boundary> boundaries;
  std::vector<double> logprobs;
  std::vector<double> values;
  std::vector<uint8_t> forced_eos;
  double reward = 0.0;

  int num_prompters() const { return static_cast<int>(boundaries.size()); }
};

// Flat 64-bit real tensor with a name used by checkpoints and gradients.
struct ParamTensor {
  std::string name;
  std::vector<int64_t> shape;
  std::vector<double> data;

  static ParamTensor zeros(std::string name, std::vector<int64_t> shape);

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  double& at(int64_t row, int64_t col) { return data[row * shape[1] + col]; }
  double at(int64_t row, int64_t col) const {
    return data[row * shape[1] + col];
  }

  void fill(double value);
  // Throws Error("structural") if data length != product(shape) or any
  // entry is non-finite.
  void validate() const;
};

// Per-prompter non-EOS token counts. Validates that boundaries partition
// [1, |tokens|] contiguously; throws Error("structural") otherwise.
std::vector<int64_t> subprompt_lengths(const Trajectory& traj);

// x followed by the emitted tokens with every EOS stripped: the sequence the
// reward oracles actually score.
std::vector<TokenId> full_prompt(const Trajectory& traj,
                                 const Vocabulary& vocab);

// Just the continuation part of full_prompt (emitted tokens, EOS stripped).
std::vector<TokenId> clean_continuation(const Trajectory& traj,
                                        const Vocabulary& vocab);

// Strict structural check: boundary partition, exactly one EOS per subprompt
// (at its end), token ranges, logprob/value/flag lengths.
void validate_trajectory(const Trajectory& traj, const Vocabulary& vocab);

}  // namespace coprompt

#endif  // COPROMPT_CORE_TYPES_HPP_
