#ifndef COPROMPT_CORE_SRC_NET_DETAIL_HPP_
#define COPROMPT_CORE_SRC_NET_DETAIL_HPP_

#include <cmath>
#include <span>
#include <vector>

#include "coprompt/types.hpp"

namespace coprompt::detail {

// One hidden tanh layer, linear output. w1: [hidden, features],
// w2: [out, hidden]. Shared by the policy head (out = |V|) and the critic
// head (out = 1).
inline void mlp_forward(std::span<const double> features,
                        const ParamTensor& w1, const ParamTensor& b1,
                        const ParamTensor& w2, const ParamTensor& b2,
                        std::vector<double>& hidden,
                        std::vector<double>& out) {
  const int64_t h_dim = w1.shape[0];
  const int64_t f_dim = w1.shape[1];
  const int64_t o_dim = w2.shape[0];
  hidden.assign(static_cast<size_t>(h_dim), 0.0);
  for (int64_t h = 0; h < h_dim; ++h) {
    double acc = b1.data[h];
    const double* row = &w1.data[h * f_dim];
    for (int64_t f = 0; f < f_dim; ++f) acc += row[f] * features[f];
    hidden[h] = std::tanh(acc);
  }
  out.assign(static_cast<size_t>(o_dim), 0.0);
  for (int64_t o = 0; o < o_dim; ++o) {
    double acc = b2.data[o];
    const double* row = &w2.data[o * h_dim];
    for (int64_t h = 0; h < h_dim; ++h) acc += row[h] * hidden[h];
    out[o] = acc;
  }
}

// Accumulates parameter gradients for the given output gradient and returns
// the gradient w.r.t. the features in `grad_features`.
inline void mlp_backward(std::span<const double> features,
                         std::span<const double> hidden,
                         std::span<const double> grad_out,
                         const ParamTensor& w1, const ParamTensor& w2,
                         ParamTensor& g_w1, ParamTensor& g_b1,
                         ParamTensor& g_w2, ParamTensor& g_b2,
                         std::vector<double>& grad_features) {
  const int64_t h_dim = w1.shape[0];
  const int64_t f_dim = w1.shape[1];
  const int64_t o_dim = w2.shape[0];

  std::vector<double> grad_hidden(static_cast<size_t>(h_dim), 0.0);
  for (int64_t o = 0; o < o_dim; ++o) {
    const double g = grad_out[o];
    if (g == 0.0) continue;
    g_b2.data[o] += g;
    const double* row = &w2.data[o * h_dim];
    double* grow = &g_w2.data[o * h_dim];
    for (int64_t h = 0; h < h_dim; ++h) {
      grow[h] += g * hidden[h];
      grad_hidden[h] += g * row[h];
    }
  }

  grad_features.assign(static_cast<size_t>(f_dim), 0.0);
  for (int64_t h = 0; h < h_dim; ++h) {
    const double gpre = grad_hidden[h] * (1.0 - hidden[h] * hidden[h]);
    if (gpre == 0.0) continue;
    g_b1.data[h] += gpre;
    const double* row = &w1.data[h * f_dim];
    double* grow = &g_w1.data[h * f_dim];
    for (int64_t f = 0; f < f_dim; ++f) {
      grow[f] += gpre * features[f];
      grad_features[f] += gpre * row[f];
    }
  }
}

}  // namespace coprompt::detail

#endif  // COPROMPT_CORE_SRC_NET_DETAIL_HPP_
