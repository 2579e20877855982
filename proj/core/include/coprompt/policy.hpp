#ifndef COPROMPT_CORE_POLICY_HPP_
#define COPROMPT_CORE_POLICY_HPP_

#include <span>
#include <utility>
#include <vector>

#include "coprompt/encoder.hpp"
#include "coprompt/rng.hpp"
#include "coprompt/types.hpp"

namespace coprompt {

// Per-prompter policy parameters: embedding table plus a one-hidden-layer
// MLP over the encoded context. Each prompter owns an independent copy.
struct PolicyParams {
  ParamTensor embed;  // [|V|, embed_dim]
  ParamTensor w1;     // [hidden, features]
  ParamTensor b1;     // [hidden]
  ParamTensor w2;     // [|V|, hidden]
  ParamTensor b2;     // [|V|]

  std::vector<ParamTensor*> tensors();
  std::vector<const ParamTensor*> tensors() const;
  void validate() const;
};

PolicyParams zero_policy_params(const Vocabulary& vocab,
                                const EncoderConfig& cfg);

// Zero tensors with the same shapes; gradient accumulators start here.
PolicyParams zeros_like(const PolicyParams& params);

// Embeddings and weights uniform in [-0.1, 0.1] from the stream, biases zero.
PolicyParams init_policy_params(const Vocabulary& vocab,
                                const EncoderConfig& cfg, Rng& rng);

// Raw scores over the vocabulary; no softmax applied. Shape-checked.
std::vector<double> policy_logits(std::span<const double> features,
                                  const PolicyParams& params);

// --- softmax utilities (max-subtraction stabilized) ---

std::vector<double> softmax(std::span<const double> logits);
double log_softmax_at(std::span<const double> logits, TokenId token);
double entropy_of(std::span<const double> probs);

// Inverse-CDF draw from softmax(logits) and the sampled token's logprob.
std::pair<TokenId, double> sample_and_logprob(std::span<const double> logits,
                                              Rng& rng);

// Argmax with lowest-id tie break, plus its logprob.
std::pair<TokenId, double> greedy_and_logprob(std::span<const double> logits);

// --- forward/backward ---

struct PolicyForward {
  std::vector<double> features;
  std::vector<double> hidden;
  std::vector<double> logits;
};

PolicyForward policy_forward(const Prompt& x, std::span<const TokenId> prefix,
                             int prompter_index, int t,
                             const PolicyParams& params,
                             const EncoderConfig& cfg);

// Reverse pass for an arbitrary logit-space gradient; accumulates into
// `grad`. The trainer folds the PPO surrogate and entropy bonus into
// `grad_logits` so one backward sweep serves the whole per-step loss.
void policy_backward(const Prompt& x, std::span<const TokenId> prefix,
                     const PolicyForward& fwd,
                     std::span<const double> grad_logits,
                     const PolicyParams& params, const EncoderConfig& cfg,
                     PolicyParams& grad);

struct LogprobEntropyGrad {
  double logprob = 0.0;
  double entropy = 0.0;
  PolicyParams grad_logprob;
  PolicyParams grad_entropy;
};

// Exact analytic gradients of log pi(token | context) and of the policy
// entropy with respect to every parameter tensor.
LogprobEntropyGrad logprob_entropy_grad(const Prompt& x,
                                        std::span<const TokenId> prefix,
                                        int prompter_index, int t,
                                        TokenId token,
                                        const PolicyParams& params,
                                        const EncoderConfig& cfg);

}  // namespace coprompt

#endif  // COPROMPT_CORE_POLICY_HPP_
