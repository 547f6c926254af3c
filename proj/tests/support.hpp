#pragma once

// Shared test helpers: random datasets and the composed GATTA loss
// (loss -> head fusion -> attention) with its analytic gradients.

#include "gatta/attention.hpp"
#include "gatta/nn.hpp"

#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace gatta::testsupport {

inline Dataset random_dataset(int n, int dim, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> label(0, classes - 1);
  Dataset d;
  d.dim = dim;
  d.num_classes = classes;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) d.features.push_back(gauss(rng));
    d.labels.push_back(label(rng));
  }
  return d;
}

// loss of the composed model: params = [w_g ; fuse(w_lu, beta, cached heads)]
inline double composed_loss(const ParamLayout& layout, const std::vector<double>& w_g,
                            const AttentionState& attn, const std::vector<int>& active,
                            const Dataset& data, std::span<const int> rows) {
  auto cache = attention_coeffs(attn, active);
  auto w_ns = fuse_head(attn, cache);
  std::vector<double> params(static_cast<size_t>(layout.total));
  std::copy(w_g.begin(), w_g.end(), params.begin());
  std::copy(w_ns.begin(), w_ns.end(), params.begin() + layout.n_global);
  std::vector<double> grad;
  return loss_and_grad(layout, params, data, rows, grad);
}

struct ComposedGrads {
  double loss = 0.0;
  std::vector<double> w_g;
  std::vector<double> w_lu;
  std::vector<double> beta;
};

inline ComposedGrads composed_grads(const ParamLayout& layout, const std::vector<double>& w_g,
                                    const AttentionState& attn, const std::vector<int>& active,
                                    const Dataset& data, std::span<const int> rows) {
  auto cache = attention_coeffs(attn, active);
  auto w_ns = fuse_head(attn, cache);
  std::vector<double> params(static_cast<size_t>(layout.total));
  std::copy(w_g.begin(), w_g.end(), params.begin());
  std::copy(w_ns.begin(), w_ns.end(), params.begin() + layout.n_global);
  std::vector<double> flat_grad;
  ComposedGrads out;
  out.loss = loss_and_grad(layout, params, data, rows, flat_grad);
  out.w_g.assign(flat_grad.begin(), flat_grad.begin() + layout.n_global);
  auto attn_grads = attention_backward(layout.head(flat_grad), attn, cache);
  out.w_lu = std::move(attn_grads.w_lu);
  out.beta = std::move(attn_grads.beta);
  return out;
}

// worst relative error of the composed analytic gradients against central
// finite differences over (w_g, w_lu, beta) jointly
inline double composed_fd_error(const ParamLayout& layout, std::vector<double> w_g,
                                AttentionState attn, const std::vector<int>& active,
                                const Dataset& data, std::span<const int> rows, double h) {
  auto analytic = composed_grads(layout, w_g, attn, active, data, rows);
  double worst = 0.0;
  auto check = [&](std::vector<double>& vec, size_t idx, double an) {
    const double keep = vec[idx];
    vec[idx] = keep + h;
    const double fp = composed_loss(layout, w_g, attn, active, data, rows);
    vec[idx] = keep - h;
    const double fm = composed_loss(layout, w_g, attn, active, data, rows);
    vec[idx] = keep;
    const double fd = (fp - fm) / (2.0 * h);
    const double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
    worst = std::max(worst, rel);
  };
  for (size_t k = 0; k < w_g.size(); ++k) check(w_g, k, analytic.w_g[k]);
  for (size_t k = 0; k < attn.w_lu.size(); ++k) check(attn.w_lu, k, analytic.w_lu[k]);
  for (size_t k = 0; k < attn.beta.size(); ++k) check(attn.beta, k, analytic.beta[k]);
  return worst;
}

// a random attention state with the given head dimension and neighbor count
inline AttentionState random_attention_state(int head_dim, int n_neighbors, double mu,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  AttentionState s;
  s.mu = mu;
  s.w_lu.resize(static_cast<size_t>(head_dim));
  s.own_prev_head.resize(static_cast<size_t>(head_dim));
  s.beta.resize(static_cast<size_t>(2 * head_dim));
  for (auto& v : s.w_lu) v = gauss(rng);
  for (auto& v : s.own_prev_head) v = gauss(rng);
  for (auto& v : s.beta) v = 0.3 * gauss(rng);
  for (int j = 0; j < n_neighbors; ++j) {
    std::vector<double> head(static_cast<size_t>(head_dim));
    for (auto& v : head) v = gauss(rng);
    s.neighbor_heads[j] = std::move(head);
  }
  return s;
}

}  // namespace gatta::testsupport
