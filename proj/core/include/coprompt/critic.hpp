#ifndef COPROMPT_CORE_CRITIC_HPP_
#define COPROMPT_CORE_CRITIC_HPP_

#include <span>
#include <vector>

#include "coprompt/encoder.hpp"
#include "coprompt/rng.hpp"
#include "coprompt/types.hpp"

namespace coprompt {

// Value head over the shared encoder family plus one extra input block: the
// mean embedding of the next prompter's realized subprompt. Passing an empty
// next subprompt zeroes that block, which is exactly the decentralized
// ablation variant. Training-only; execution never consults it.
struct CriticParams {
  ParamTensor embed;  // [|V|, embed_dim]
  ParamTensor w1;     // [hidden, critic_features]
  ParamTensor b1;     // [hidden]
  ParamTensor w2;     // [1, hidden]
  ParamTensor b2;     // [1]

  std::vector<ParamTensor*> tensors();
  std::vector<const ParamTensor*> tensors() const;
  void validate() const;
};

CriticParams zero_critic_params(const Vocabulary& vocab,
                                const EncoderConfig& cfg);
CriticParams zeros_like(const CriticParams& params);
CriticParams init_critic_params(const Vocabulary& vocab,
                                const EncoderConfig& cfg, Rng& rng);

struct CriticForward {
  std::vector<double> features;
  std::vector<double> hidden;
  double value = 0.0;
};

// v(x, y_{1:t-1}, next_subprompt). EOS tokens in next_subprompt are stripped
// before encoding; the last prompter passes an empty span.
CriticForward critic_forward(const Prompt& x, std::span<const TokenId> prefix,
                             std::span<const TokenId> next_subprompt,
                             int prompter_index, int t,
                             const CriticParams& params,
                             const EncoderConfig& cfg, TokenId eos_id);

double critic_value(const Prompt& x, std::span<const TokenId> prefix,
                    std::span<const TokenId> next_subprompt,
                    int prompter_index, int t, const CriticParams& params,
                    const EncoderConfig& cfg, TokenId eos_id);

// Accumulates d/dphi of the given value-space gradient into `grad`.
void critic_backward(const Prompt& x, std::span<const TokenId> prefix,
                     std::span<const TokenId> next_subprompt,
                     const CriticForward& fwd, double grad_value,
                     const CriticParams& params, const EncoderConfig& cfg,
                     TokenId eos_id, CriticParams& grad);

struct ValueGradResult {
  double value = 0.0;
  double loss = 0.0;
};

// Squared-error term (v - target)^2 scaled by `scale`, with its exact
// gradient accumulated into `grad`.
ValueGradResult value_grad(const Prompt& x, std::span<const TokenId> prefix,
                           std::span<const TokenId> next_subprompt,
                           int prompter_index, int t, double target,
                           const CriticParams& params, const EncoderConfig& cfg,
                           TokenId eos_id, CriticParams& grad,
                           double scale = 1.0);

}  // namespace coprompt

#endif  // COPROMPT_CORE_CRITIC_HPP_
