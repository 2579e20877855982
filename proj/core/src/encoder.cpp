#include "coprompt/encoder.hpp"

#include <algorithm>
#include <cstring>

#include "coprompt/error.hpp"

namespace coprompt {

void EncoderConfig::validate() const {
  if (embed_dim < 1 || window < 1 || hidden_dim < 1 || n_prompters < 1 ||
      token_limit < 1) {
    throw Error("structural", "encoder dimensions must be positive");
  }
}

int policy_feature_dim(const EncoderConfig& cfg) {
  return (2 + cfg.window) * cfg.embed_dim + cfg.n_prompters + 1;
}

int critic_feature_dim(const EncoderConfig& cfg) {
  return (3 + cfg.window) * cfg.embed_dim + cfg.n_prompters + 1;
}

void for_each_embedding_use(
    const Prompt& x, std::span<const TokenId> prefix,
    std::span<const TokenId> next_subprompt, bool with_next_block,
    const EncoderConfig& cfg,
    const std::function<void(int offset, TokenId token, double scale)>& fn) {
  const int d = cfg.embed_dim;
  int offset = 0;

  if (!x.tokens.empty()) {
    const double scale = 1.0 / static_cast<double>(x.tokens.size());
    for (TokenId t : x.tokens) fn(offset, t, scale);
  }
  offset += d;

  if (!prefix.empty()) {
    const double scale = 1.0 / static_cast<double>(prefix.size());
    for (TokenId t : prefix) fn(offset, t, scale);
  }
  offset += d;

  if (with_next_block) {
    if (!next_subprompt.empty()) {
      const double scale = 1.0 / static_cast<double>(next_subprompt.size());
      for (TokenId t : next_subprompt) fn(offset, t, scale);
    }
    offset += d;
  }

  // Last-k window over x || prefix, zero-padded at the front.
  const int64_t xn = static_cast<int64_t>(x.tokens.size());
  const int64_t cn = xn + static_cast<int64_t>(prefix.size());
  const int64_t m = std::min<int64_t>(cfg.window, cn);
  for (int64_t j = 0; j < m; ++j) {
    const int64_t pos = cn - m + j;  // index into x || prefix
    const TokenId tok =
        pos < xn ? x.tokens[pos] : prefix[static_cast<size_t>(pos - xn)];
    const int slot = cfg.window - static_cast<int>(m) + static_cast<int>(j);
    fn(offset + slot * d, tok, 1.0);
  }
}

namespace {

void encode_impl(const Prompt& x, std::span<const TokenId> prefix,
                 std::span<const TokenId> next_subprompt, bool with_next_block,
                 int prompter_index, int t, const ParamTensor& embed,
                 const EncoderConfig& cfg, std::span<double> out) {
  cfg.validate();
  const int dim = with_next_block ? critic_feature_dim(cfg)
                                  : policy_feature_dim(cfg);
  if (static_cast<int>(out.size()) != dim) {
    throw Error("structural", "feature buffer size mismatch");
  }
  if (prompter_index < 0 || prompter_index >= cfg.n_prompters) {
    throw Error("structural", "prompter index out of range");
  }
  std::fill(out.begin(), out.end(), 0.0);

  const int d = cfg.embed_dim;
  for_each_embedding_use(
      x, prefix, next_subprompt, with_next_block, cfg,
      [&](int offset, TokenId token, double scale) {
        const double* row = &embed.data[static_cast<size_t>(token) * d];
        for (int c = 0; c < d; ++c) out[offset + c] += scale * row[c];
      });

  const int onehot_base = dim - cfg.n_prompters - 1;
  out[onehot_base + prompter_index] = 1.0;
  out[dim - 1] = static_cast<double>(t) /
                 static_cast<double>(std::max(1, cfg.token_limit));
}

}  // namespace

void encode_context(const Prompt& x, std::span<const TokenId> prefix,
                    int prompter_index, int t, const ParamTensor& embed,
                    const EncoderConfig& cfg, std::span<double> out) {
  encode_impl(x, prefix, {}, false, prompter_index, t, embed, cfg, out);
}

void encode_context_with_next(const Prompt& x, std::span<const TokenId> prefix,
                              std::span<const TokenId> next_subprompt,
                              int prompter_index, int t,
                              const ParamTensor& embed,
                              const EncoderConfig& cfg,
                              std::span<double> out) {
  encode_impl(x, prefix, next_subprompt, true, prompter_index, t, embed, cfg,
              out);
}

void scatter_embedding_grad(const Prompt& x, std::span<const TokenId> prefix,
                            std::span<const TokenId> next_subprompt,
                            bool with_next_block, const EncoderConfig& cfg,
                            std::span<const double> grad_features,
                            ParamTensor& grad_embed) {
  const int d = cfg.embed_dim;
  for_each_embedding_use(
      x, prefix, next_subprompt, with_next_block, cfg,
      [&](int offset, TokenId token, double scale) {
        double* row = &grad_embed.data[static_cast<size_t>(token) * d];
        for (int c = 0; c < d; ++c) row[c] += scale * grad_features[offset + c];
      });
}

}  // namespace coprompt
