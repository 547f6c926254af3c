#pragma once

// Graph-attention aggregation of node-specific heads: coefficients, fusion,
// the exact backward pass to w_lu and beta, and the fusion-parameter bound.

#include "gatta/nn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace gatta {

struct AttentionState {
  std::vector<double> beta;                          // length 2F
  std::vector<double> w_lu;                          // length F
  std::vector<double> own_prev_head;                 // w_{i,ns} from the previous round
  std::map<int, std::vector<double>> neighbor_heads; // cached previous-round heads
  double mu = 0.9;                                   // fusion parameter in [0,1]

  int head_dim() const { return static_cast<int>(w_lu.size()); }

  void validate() const {
    const size_t f = w_lu.size();
    if (beta.size() != 2 * f) throw std::invalid_argument("attention: beta must have length 2F");
    if (own_prev_head.size() != f)
      throw std::invalid_argument("attention: own_prev_head length mismatch");
    for (const auto& [id, head] : neighbor_heads)
      if (head.size() != f)
        throw std::invalid_argument("attention: neighbor head length mismatch for id " +
                                    std::to_string(id));
    if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("attention: mu must be in [0,1]");
  }
};

struct AttentionCache {
  std::vector<int> active;                  // sorted neighbor ids
  std::vector<std::vector<double>> concat;  // c_j = (own_prev || head_j), length 2F
  std::vector<double> x;                    // x_j = beta^T c_j
  std::vector<double> e;                    // ELU(x_j)
  std::vector<double> alphas;               // softmax over e
  std::vector<double> z;                    // sum_j alpha_j * head_j, length F
  std::vector<double> z_grad;               // ELU'(z) elementwise
};

// alpha_j = softmax over the active set of ELU(beta^T (own_prev || head_j)),
// computed with max-subtraction.
inline AttentionCache attention_coeffs(const AttentionState& state,
                                       std::span<const int> active) {
  state.validate();
  if (active.empty()) throw std::invalid_argument("attention_coeffs: empty active set");
  const size_t f = state.w_lu.size();
  AttentionCache cache;
  cache.active.assign(active.begin(), active.end());
  std::sort(cache.active.begin(), cache.active.end());
  for (int id : cache.active) {
    auto it = state.neighbor_heads.find(id);
    if (it == state.neighbor_heads.end())
      throw std::invalid_argument("attention_coeffs: no cached head for neighbor " +
                                  std::to_string(id));
    std::vector<double> c(2 * f);
    std::copy(state.own_prev_head.begin(), state.own_prev_head.end(), c.begin());
    std::copy(it->second.begin(), it->second.end(), c.begin() + static_cast<long>(f));
    double xj = 0.0;
    for (size_t k = 0; k < 2 * f; ++k) xj += state.beta[k] * c[k];
    cache.concat.push_back(std::move(c));
    cache.x.push_back(xj);
    cache.e.push_back(elu(xj));
  }
  const double mx = *std::max_element(cache.e.begin(), cache.e.end());
  double denom = 0.0;
  cache.alphas.resize(cache.e.size());
  for (size_t j = 0; j < cache.e.size(); ++j) {
    cache.alphas[j] = std::exp(cache.e[j] - mx);
    denom += cache.alphas[j];
  }
  for (double& a : cache.alphas) a /= denom;

  cache.z.assign(f, 0.0);
  for (size_t j = 0; j < cache.active.size(); ++j) {
    const auto& head = state.neighbor_heads.at(cache.active[j]);
    for (size_t k = 0; k < f; ++k) cache.z[k] += cache.alphas[j] * head[k];
  }
  cache.z_grad.resize(f);
  for (size_t k = 0; k < f; ++k) cache.z_grad[k] = elu_grad(cache.z[k]);
  return cache;
}

// w_ns = mu * w_lu + (1-mu) * ELU(sum_j alpha_j head_j), ELU elementwise.
inline std::vector<double> fuse_head(const AttentionState& state, const AttentionCache& cache) {
  const size_t f = state.w_lu.size();
  if (cache.z.size() != f) throw std::invalid_argument("fuse_head: stale cache");
  std::vector<double> w_ns(f);
  for (size_t k = 0; k < f; ++k)
    w_ns[k] = state.mu * state.w_lu[k] + (1.0 - state.mu) * elu(cache.z[k]);
  return w_ns;
}

struct AttentionGrads {
  std::vector<double> w_lu;  // length F
  std::vector<double> beta;  // length 2F
};

// grad_wlu = mu * upstream (exact); grad_beta follows the softmax chain:
//   u = (1-mu) * upstream .* ELU'(z)
//   d alpha_j / d beta = alpha_j (ELU'(x_j) c_j - sum_l alpha_l ELU'(x_l) c_l)
//   grad_beta = sum_j (u . head_j) * d alpha_j / d beta
inline AttentionGrads attention_backward(std::span<const double> upstream,
                                         const AttentionState& state,
                                         const AttentionCache& cache) {
  const size_t f = state.w_lu.size();
  if (upstream.size() != f || cache.z.size() != f || cache.alphas.size() != cache.active.size())
    throw std::invalid_argument("attention_backward: stale cache or shape mismatch");
  AttentionGrads grads;
  grads.w_lu.resize(f);
  for (size_t k = 0; k < f; ++k) grads.w_lu[k] = state.mu * upstream[k];

  std::vector<double> u(f);
  for (size_t k = 0; k < f; ++k) u[k] = (1.0 - state.mu) * upstream[k] * cache.z_grad[k];

  const size_t m = cache.active.size();
  std::vector<double> weighted(2 * f, 0.0);  // sum_l alpha_l ELU'(x_l) c_l
  for (size_t j = 0; j < m; ++j) {
    const double w = cache.alphas[j] * elu_grad(cache.x[j]);
    for (size_t k = 0; k < 2 * f; ++k) weighted[k] += w * cache.concat[j][k];
  }
  grads.beta.assign(2 * f, 0.0);
  for (size_t j = 0; j < m; ++j) {
    const auto& head = state.neighbor_heads.at(cache.active[j]);
    double s = 0.0;
    for (size_t k = 0; k < f; ++k) s += u[k] * head[k];
    const double gj = elu_grad(cache.x[j]);
    for (size_t k = 0; k < 2 * f; ++k)
      grads.beta[k] += s * cache.alphas[j] * (gj * cache.concat[j][k] - weighted[k]);
  }
  return grads;
}

struct MuBound {
  double bound = 0.0;       // max(0, 1 - 1/sqrt(d(d-1) D))
  double d_full = 0.0;      // D_i with the activation-gradient factors
  double d_simplified = -1; // pairwise-difference form, set when all x_j >= 0
  bool all_x_nonneg = false;
};

// Fusion-parameter lower bound. Vacuous (0) for a single neighbor or when the
// pairwise differences vanish.
inline MuBound mu_lower_bound(const AttentionState& state, std::span<const int> active) {
  state.validate();
  if (active.empty()) throw std::invalid_argument("mu_lower_bound: empty active set");
  const size_t f = state.w_lu.size();
  const size_t d = active.size();
  MuBound out;
  std::vector<int> ids(active.begin(), active.end());
  std::sort(ids.begin(), ids.end());

  std::vector<std::vector<double>> concat;
  std::vector<double> xs, gs;
  double head_norm_sum = 0.0;
  for (int id : ids) {
    auto it = state.neighbor_heads.find(id);
    if (it == state.neighbor_heads.end())
      throw std::invalid_argument("mu_lower_bound: no cached head for neighbor " +
                                  std::to_string(id));
    std::vector<double> c(2 * f);
    std::copy(state.own_prev_head.begin(), state.own_prev_head.end(), c.begin());
    std::copy(it->second.begin(), it->second.end(), c.begin() + static_cast<long>(f));
    double xj = 0.0;
    for (size_t k = 0; k < 2 * f; ++k) xj += state.beta[k] * c[k];
    xs.push_back(xj);
    gs.push_back(elu_grad(xj));
    concat.push_back(std::move(c));
    for (double v : it->second) head_norm_sum += v * v;
  }
  out.all_x_nonneg = std::all_of(xs.begin(), xs.end(), [](double x) { return x >= 0.0; });

  double pair_sum = 0.0;
  for (size_t j = 0; j < d; ++j)
    for (size_t l = 0; l < d; ++l) {
      if (l == j) continue;
      double acc = 0.0;
      for (size_t k = 0; k < 2 * f; ++k) {
        const double diff = gs[j] * concat[j][k] - gs[l] * concat[l][k];
        acc += diff * diff;
      }
      pair_sum += acc;
    }
  out.d_full = head_norm_sum * pair_sum;

  if (out.all_x_nonneg) {
    double simple_pairs = 0.0;
    for (size_t j = 0; j < d; ++j)
      for (size_t l = 0; l < d; ++l) {
        if (l == j) continue;
        const auto& hj = state.neighbor_heads.at(ids[j]);
        const auto& hl = state.neighbor_heads.at(ids[l]);
        double acc = 0.0;
        for (size_t k = 0; k < f; ++k) {
          const double diff = hj[k] - hl[k];
          acc += diff * diff;
        }
        simple_pairs += acc;
      }
    out.d_simplified = head_norm_sum * simple_pairs;
  }

  if (d <= 1 || out.d_full <= 0.0) {
    out.bound = 0.0;
    return out;
  }
  const double denom = std::sqrt(static_cast<double>(d) * static_cast<double>(d - 1) * out.d_full);
  out.bound = std::clamp(1.0 - 1.0 / denom, 0.0, 1.0);
  return out;
}

}  // namespace gatta
