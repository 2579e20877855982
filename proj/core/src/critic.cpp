#include "coprompt/critic.hpp"

#include "coprompt/error.hpp"
#include "net_detail.hpp"

namespace coprompt {
namespace {

std::vector<TokenId> strip_eos(std::span<const TokenId> tokens,
                               TokenId eos_id) {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (TokenId t : tokens) {
    if (t != eos_id) out.push_back(t);
  }
  return out;
}

}  // namespace

std::vector<ParamTensor*> CriticParams::tensors() {
  return {&embed, &w1, &b1, &w2, &b2};
}

std::vector<const ParamTensor*> CriticParams::tensors() const {
  return {&embed, &w1, &b1, &w2, &b2};
}

void CriticParams::validate() const {
  for (const ParamTensor* t : tensors()) t->validate();
}

CriticParams zero_critic_params(const Vocabulary& vocab,
                                const EncoderConfig& cfg) {
  cfg.validate();
  vocab.validate();
  const int64_t v = vocab.size;
  const int64_t d = cfg.embed_dim;
  const int64_t h = cfg.hidden_dim;
  const int64_t f = critic_feature_dim(cfg);
  CriticParams p;
  p.embed = ParamTensor::zeros("embed", {v, d});
  p.w1 = ParamTensor::zeros("w1", {h, f});
  p.b1 = ParamTensor::zeros("b1", {h});
  p.w2 = ParamTensor::zeros("w2", {1, h});
  p.b2 = ParamTensor::zeros("b2", {1});
  return p;
}

CriticParams zeros_like(const CriticParams& params) {
  CriticParams out = params;
  for (ParamTensor* t : out.tensors()) t->fill(0.0);
  return out;
}

CriticParams init_critic_params(const Vocabulary& vocab,
                                const EncoderConfig& cfg, Rng& rng) {
  CriticParams p = zero_critic_params(vocab, cfg);
  for (ParamTensor* t : {&p.embed, &p.w1, &p.w2}) {
    for (double& x : t->data) x = rng.next_uniform(-0.1, 0.1);
  }
  return p;
}

CriticForward critic_forward(const Prompt& x, std::span<const TokenId> prefix,
                             std::span<const TokenId> next_subprompt,
                             int prompter_index, int t,
                             const CriticParams& params,
                             const EncoderConfig& cfg, TokenId eos_id) {
  const std::vector<TokenId> next = strip_eos(next_subprompt, eos_id);
  CriticForward fwd;
  fwd.features.resize(static_cast<size_t>(critic_feature_dim(cfg)));
  encode_context_with_next(x, prefix, next, prompter_index, t, params.embed,
                           cfg, fwd.features);
  std::vector<double> out;
  detail::mlp_forward(fwd.features, params.w1, params.b1, params.w2, params.b2,
                      fwd.hidden, out);
  fwd.value = out[0];
  return fwd;
}

double critic_value(const Prompt& x, std::span<const TokenId> prefix,
                    std::span<const TokenId> next_subprompt,
                    int prompter_index, int t, const CriticParams& params,
                    const EncoderConfig& cfg, TokenId eos_id) {
  return critic_forward(x, prefix, next_subprompt, prompter_index, t, params,
                        cfg, eos_id)
      .value;
}

void critic_backward(const Prompt& x, std::span<const TokenId> prefix,
                     std::span<const TokenId> next_subprompt,
                     const CriticForward& fwd, double grad_value,
                     const CriticParams& params, const EncoderConfig& cfg,
                     TokenId eos_id, CriticParams& grad) {
  const std::vector<TokenId> next = strip_eos(next_subprompt, eos_id);
  const double grad_out[1] = {grad_value};
  std::vector<double> grad_features;
  detail::mlp_backward(fwd.features, fwd.hidden, grad_out, params.w1,
                       params.w2, grad.w1, grad.b1, grad.w2, grad.b2,
                       grad_features);
  scatter_embedding_grad(x, prefix, next, true, cfg, grad_features,
                         grad.embed);
}

ValueGradResult value_grad(const Prompt& x, std::span<const TokenId> prefix,
                           std::span<const TokenId> next_subprompt,
                           int prompter_index, int t, double target,
                           const CriticParams& params, const EncoderConfig& cfg,
                           TokenId eos_id, CriticParams& grad, double scale) {
  const CriticForward fwd = critic_forward(x, prefix, next_subprompt,
                                           prompter_index, t, params, cfg,
                                           eos_id);
  const double diff = fwd.value - target;
  critic_backward(x, prefix, next_subprompt, fwd, scale * 2.0 * diff, params,
                  cfg, eos_id, grad);
  return ValueGradResult{fwd.value, scale * diff * diff};
}

}  // namespace coprompt
