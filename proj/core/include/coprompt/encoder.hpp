#ifndef COPROMPT_CORE_ENCODER_HPP_
#define COPROMPT_CORE_ENCODER_HPP_

#include <functional>
#include <span>

#include "coprompt/types.hpp"

namespace coprompt {

// Fixed-size context featurization shared by policies and critics. The
// paper-scale transformer is replaced by mean-pooled embeddings plus a
// last-k token window; the conditional interface (x, y_{1:t-1}) is the same.
struct EncoderConfig {
  int embed_dim = 16;
  int window = 8;
  int hidden_dim = 64;
  int n_prompters = 1;
  int token_limit = 1;

  void validate() const;
};

// Feature layout (policy):
//   [ mean(x) | mean(prefix) | last-k window | one-hot prompter | t/T ]
// The critic inserts a mean(next_subprompt) block after mean(prefix).
int policy_feature_dim(const EncoderConfig& cfg);
int critic_feature_dim(const EncoderConfig& cfg);

// Enumerates every (feature block offset, token, scale) pair through which
// an embedding row enters the feature vector. Both the encoder and the
// embedding-gradient scatter walk this, so they cannot disagree.
// `next_subprompt` may be empty; pass `with_next_block = false` for the
// policy layout.
void for_each_embedding_use(
    const Prompt& x, std::span<const TokenId> prefix,
    std::span<const TokenId> next_subprompt, bool with_next_block,
    const EncoderConfig& cfg,
    const std::function<void(int offset, TokenId token, double scale)>& fn);

// Writes the policy feature vector for prompter `prompter_index` (0-based)
// at timestep `t` (1-based). `out` must have policy_feature_dim entries.
void encode_context(const Prompt& x, std::span<const TokenId> prefix,
                    int prompter_index, int t, const ParamTensor& embed,
                    const EncoderConfig& cfg, std::span<double> out);

// Critic variant with the extra next-subprompt block (already EOS-stripped).
void encode_context_with_next(const Prompt& x, std::span<const TokenId> prefix,
                              std::span<const TokenId> next_subprompt,
                              int prompter_index, int t,
                              const ParamTensor& embed,
                              const EncoderConfig& cfg, std::span<double> out);

// Scatters feature-space gradients back into the embedding table.
void scatter_embedding_grad(const Prompt& x, std::span<const TokenId> prefix,
                            std::span<const TokenId> next_subprompt,
                            bool with_next_block, const EncoderConfig& cfg,
                            std::span<const double> grad_features,
                            ParamTensor& grad_embed);

}  // namespace coprompt

#endif  // COPROMPT_CORE_ENCODER_HPP_
