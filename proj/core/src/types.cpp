#include "coprompt/types.hpp"

#include <cmath>

#include "coprompt/error.hpp"

namespace coprompt {

void Vocabulary::validate() const {
  if (size < 2) {
    throw Error("structural", "vocabulary size must be >= 2, got " +
                                  std::to_string(size));
  }
  if (eos_id < 0 || eos_id >= size) {
    throw Error("structural", "eos_id " + std::to_string(eos_id) +
                                  " out of range [0, " + std::to_string(size) +
                                  ")");
  }
}

void Prompt::validate(const Vocabulary& vocab) const {
  for (TokenId t : tokens) {
    if (!vocab.contains(t)) {
      throw Error("structural",
                  "prompt token " + std::to_string(t) + " out of range");
    }
    if (t == vocab.eos_id) {
      throw Error("structural", "prompt must not contain the EOS token");
    }
  }
}

const Prompt& PromptSource::select(uint64_t episode_index, Rng& rng) const {
  if (prompts.empty()) {
    throw Error("structural", "prompt source is empty");
  }
  if (sampling == PromptSampling::kCyclic) {
    return prompts[episode_index % prompts.size()];
  }
  return prompts[rng.next_below(static_cast<uint32_t>(prompts.size()))];
}

void PromptSource::validate(const Vocabulary& vocab) const {
  if (prompts.empty()) {
    throw Error("structural", "prompt source must hold at least one prompt");
  }
  for (const Prompt& p : prompts) p.validate(vocab);
}

ParamTensor ParamTensor::zeros(std::string name, std::vector<int64_t> shape) {
  ParamTensor t;
  t.name = std::move(name);
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  t.shape = std::move(shape);
  t.data.assign(static_cast<size_t>(n), 0.0);
  return t;
}

void ParamTensor::fill(double value) {
  for (double& x : data) x = value;
}

void ParamTensor::validate() const {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  if (n != numel()) {
    throw Error("structural", "tensor '" + name + "' shape/data mismatch");
  }
  for (double x : data) {
    if (!std::isfinite(x)) {
      throw Error("structural", "tensor '" + name + "' has non-finite entry");
    }
  }
}

std::vector<int64_t> subprompt_lengths(const Trajectory& traj) {
  const int total = static_cast<int>(traj.tokens.size());
  if (traj.boundaries.empty()) {
    throw Error("structural", "trajectory has no boundaries");
  }
  std::vector<int64_t> lengths;
  lengths.reserve(traj.boundaries.size());
  int expected_begin = 1;
  for (const Boundary& b : traj.boundaries) {
    if (b.begin != expected_begin || b.end < b.begin || b.end > total) {
      throw Error("structural", "boundaries do not partition the trajectory");
    }
    lengths.push_back(b.end - b.begin);  // excludes the subprompt's EOS
    expected_begin = b.end + 1;
  }
  if (expected_begin != total + 1) {
    throw Error("structural", "boundaries do not cover all emitted tokens");
  }
  return lengths;
}

std::vector<TokenId> full_prompt(const Trajectory& traj,
                                 const Vocabulary& vocab) {
  std::vector<TokenId> out = traj.prompt.tokens;
  out.reserve(out.size() + traj.tokens.size());
  for (TokenId t : traj.tokens) {
    if (t != vocab.eos_id) out.push_back(t);
  }
  return out;
}

std::vector<TokenId> clean_continuation(const Trajectory& traj,
                                        const Vocabulary& vocab) {
  std::vector<TokenId> out;
  out.reserve(traj.tokens.size());
  for (TokenId t : traj.tokens) {
    if (t != vocab.eos_id) out.push_back(t);
  }
  return out;
}

void validate_trajectory(const Trajectory& traj, const Vocabulary& vocab) {
  vocab.validate();
  traj.prompt.validate(vocab);
  const size_t total = traj.tokens.size();
  if (traj.logprobs.size() != total || traj.values.size() != total ||
      traj.forced_eos.size() != total) {
    throw Error("structural", "per-step arrays must match token count");
  }
  int eos_count = 0;
  for (TokenId t : traj.tokens) {
    if (!vocab.contains(t)) {
      throw Error("structural", "emitted token out of range");
    }
    if (t == vocab.eos_id) ++eos_count;
  }
  if (eos_count != traj.num_prompters()) {
    throw Error("structural", "EOS count must equal the number of prompters");
  }
  subprompt_lengths(traj);  // partition check
  for (const Boundary& b : traj.boundaries) {
    if (traj.tokens[b.end - 1] != vocab.eos_id) {
      throw Error("structural", "subprompt must end with EOS");
    }
    for (int t = b.begin; t < b.end; ++t) {
      if (traj.tokens[t - 1] == vocab.eos_id) {
        throw Error("structural", "EOS inside a subprompt body");
      }
    }
  }
  for (size_t k = 0; k < total; ++k) {
    if (traj.forced_eos[k] && traj.tokens[k] != vocab.eos_id) {
      throw Error("structural", "forced flag on a non-EOS step");
    }
    if (traj.forced_eos[k] && traj.logprobs[k] != 0.0) {
      throw Error("structural", "forced EOS must carry logprob 0");
    }
  }
}

}  // namespace coprompt
