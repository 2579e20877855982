#include "coprompt/policy.hpp"

#include <algorithm>
#include <cmath>

#include "coprompt/error.hpp"
#include "net_detail.hpp"

namespace coprompt {

std::vector<ParamTensor*> PolicyParams::tensors() {
  return {&embed, &w1, &b1, &w2, &b2};
}

std::vector<const ParamTensor*> PolicyParams::tensors() const {
  return {&embed, &w1, &b1, &w2, &b2};
}

void PolicyParams::validate() const {
  for (const ParamTensor* t : tensors()) t->validate();
}

PolicyParams zero_policy_params(const Vocabulary& vocab,
                                const EncoderConfig& cfg) {
  cfg.validate();
  vocab.validate();
  const int64_t v = vocab.size;
  const int64_t d = cfg.embed_dim;
  const int64_t h = cfg.hidden_dim;
  const int64_t f = policy_feature_dim(cfg);
  PolicyParams p;
  p.embed = ParamTensor::zeros("embed", {v, d});
  p.w1 = ParamTensor::zeros("w1", {h, f});
  p.b1 = ParamTensor::zeros("b1", {h});
  p.w2 = ParamTensor::zeros("w2", {v, h});
  p.b2 = ParamTensor::zeros("b2", {v});
  return p;
}

PolicyParams zeros_like(const PolicyParams& params) {
  PolicyParams out = params;
  for (ParamTensor* t : out.tensors()) t->fill(0.0);
  return out;
}

namespace {

void fill_uniform(ParamTensor& t, Rng& rng) {
  for (double& x : t.data) x = rng.next_uniform(-0.1, 0.1);
}

}  // namespace

PolicyParams init_policy_params(const Vocabulary& vocab,
                                const EncoderConfig& cfg, Rng& rng) {
  PolicyParams p = zero_policy_params(vocab, cfg);
  fill_uniform(p.embed, rng);
  fill_uniform(p.w1, rng);
  fill_uniform(p.w2, rng);
  return p;
}

std::vector<double> policy_logits(std::span<const double> features,
                                  const PolicyParams& params) {
  if (static_cast<int64_t>(features.size()) != params.w1.shape[1]) {
    throw Error("structural", "feature length does not match policy weights");
  }
  std::vector<double> hidden, logits;
  detail::mlp_forward(features, params.w1, params.b1, params.w2, params.b2,
                      hidden, logits);
  return logits;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double z = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - m);
    z += probs[i];
  }
  for (double& p : probs) p /= z;
  return probs;
}

double log_softmax_at(std::span<const double> logits, TokenId token) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - m);
  return logits[token] - m - std::log(z);
}

double entropy_of(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::pair<TokenId, double> sample_and_logprob(std::span<const double> logits,
                                              Rng& rng) {
  const std::vector<double> probs = softmax(logits);
  const double u = rng.next_double();
  double acc = 0.0;
  TokenId token = static_cast<TokenId>(probs.size()) - 1;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) {
      token = static_cast<TokenId>(i);
      break;
    }
  }
  return {token, log_softmax_at(logits, token)};
}

std::pair<TokenId, double> greedy_and_logprob(
    std::span<const double> logits) {
  TokenId best = 0;
  for (size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = static_cast<TokenId>(i);
  }
  return {best, log_softmax_at(logits, best)};
}

PolicyForward policy_forward(const Prompt& x, std::span<const TokenId> prefix,
                             int prompter_index, int t,
                             const PolicyParams& params,
                             const EncoderConfig& cfg) {
  PolicyForward fwd;
  fwd.features.resize(static_cast<size_t>(policy_feature_dim(cfg)));
  encode_context(x, prefix, prompter_index, t, params.embed, cfg,
                 fwd.features);
  detail::mlp_forward(fwd.features, params.w1, params.b1, params.w2, params.b2,
                      fwd.hidden, fwd.logits);
  return fwd;
}

void policy_backward(const Prompt& x, std::span<const TokenId> prefix,
                     const PolicyForward& fwd,
                     std::span<const double> grad_logits,
                     const PolicyParams& params, const EncoderConfig& cfg,
                     PolicyParams& grad) {
  std::vector<double> grad_features;
  detail::mlp_backward(fwd.features, fwd.hidden, grad_logits, params.w1,
                       params.w2, grad.w1, grad.b1, grad.w2, grad.b2,
                       grad_features);
  scatter_embedding_grad(x, prefix, {}, false, cfg, grad_features, grad.embed);
}

LogprobEntropyGrad logprob_entropy_grad(const Prompt& x,
                                        std::span<const TokenId> prefix,
                                        int prompter_index, int t,
                                        TokenId token,
                                        const PolicyParams& params,
                                        const EncoderConfig& cfg) {
  const PolicyForward fwd =
      policy_forward(x, prefix, prompter_index, t, params, cfg);
  const std::vector<double> probs = softmax(fwd.logits);
  const double entropy = entropy_of(probs);

  LogprobEntropyGrad out;
  out.logprob = log_softmax_at(fwd.logits, token);
  out.entropy = entropy;
  out.grad_logprob = zeros_like(params);
  out.grad_entropy = zeros_like(params);

  // d log p_a / d z_j = [j == a] - p_j
  std::vector<double> gz(probs.size());
  for (size_t j = 0; j < probs.size(); ++j) gz[j] = -probs[j];
  gz[token] += 1.0;
  policy_backward(x, prefix, fwd, gz, params, cfg, out.grad_logprob);

  // d H / d z_j = -p_j (log p_j + H); zero probability contributes nothing.
  for (size_t j = 0; j < probs.size(); ++j) {
    gz[j] = probs[j] > 0.0 ? -probs[j] * (std::log(probs[j]) + entropy) : 0.0;
  }
  policy_backward(x, prefix, fwd, gz, params, cfg, out.grad_entropy);
  return out;
}

}  // namespace coprompt
