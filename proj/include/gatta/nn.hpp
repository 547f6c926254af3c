#pragma once

// Fully-connected network over a flat parameter vector: global front layers
// plus a node-specific last layer, ELU activations, softmax cross-entropy,
// RMSProp.

#include "gatta/datagen.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace gatta {

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

struct ParamLayout {
  std::vector<int> layer_sizes;  // [d_in, h_1, ..., h_m, C]
  int n_global = 0;              // all layers except the last
  int head_dim = 0;              // F = (h_m + 1) * C
  int total = 0;                 // N_v

  static ParamLayout make(std::vector<int> sizes) {
    if (sizes.size() < 2) throw std::invalid_argument("ParamLayout: need at least 2 layer sizes");
    for (int s : sizes)
      if (s < 1) throw std::invalid_argument("ParamLayout: layer sizes must be positive");
    ParamLayout l;
    l.layer_sizes = std::move(sizes);
    const int layers = static_cast<int>(l.layer_sizes.size()) - 1;
    for (int i = 0; i < layers; ++i) {
      int span = l.layer_sizes[i] * l.layer_sizes[i + 1] + l.layer_sizes[i + 1];
      l.total += span;
      if (i < layers - 1) l.n_global += span;
    }
    l.head_dim = l.total - l.n_global;
    return l;
  }

  int num_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
  int input_dim() const { return layer_sizes.front(); }
  int num_classes() const { return layer_sizes.back(); }

  // offset of layer l's weight block; biases follow the weights
  int layer_offset(int l) const {
    int off = 0;
    for (int i = 0; i < l; ++i) off += layer_sizes[i] * layer_sizes[i + 1] + layer_sizes[i + 1];
    return off;
  }

  std::span<double> global(std::vector<double>& p) const {
    return {p.data(), static_cast<size_t>(n_global)};
  }
  std::span<const double> global(const std::vector<double>& p) const {
    return {p.data(), static_cast<size_t>(n_global)};
  }
  std::span<double> head(std::vector<double>& p) const {
    return {p.data() + n_global, static_cast<size_t>(head_dim)};
  }
  std::span<const double> head(const std::vector<double>& p) const {
    return {p.data() + n_global, static_cast<size_t>(head_dim)};
  }
};

// Glorot-uniform weights, zero biases.
inline std::vector<double> init_params(const ParamLayout& layout, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> p(static_cast<size_t>(layout.total), 0.0);
  for (int l = 0; l < layout.num_layers(); ++l) {
    const int fan_in = layout.layer_sizes[l];
    const int fan_out = layout.layer_sizes[l + 1];
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-s, s);
    double* w = p.data() + layout.layer_offset(l);
    for (int k = 0; k < fan_in * fan_out; ++k) w[k] = dist(rng);
    // biases stay zero
  }
  return p;
}

struct ForwardCache {
  std::vector<std::vector<double>> activations;      // activations[0] = x
  std::vector<std::vector<double>> preactivations;   // one per layer
};

// ELU after every layer except the last. Weight block of layer l is row-major
// [out x in], biases follow.
inline std::vector<double> forward(const ParamLayout& layout, const std::vector<double>& params,
                                   std::span<const double> x, ForwardCache* cache = nullptr) {
  if (static_cast<int>(x.size()) != layout.input_dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  if (static_cast<int>(params.size()) != layout.total)
    throw std::invalid_argument("forward: parameter length mismatch");
  std::vector<double> act(x.begin(), x.end());
  if (cache) {
    cache->activations.clear();
    cache->preactivations.clear();
    cache->activations.push_back(act);
  }
  for (int l = 0; l < layout.num_layers(); ++l) {
    const int in = layout.layer_sizes[l];
    const int out = layout.layer_sizes[l + 1];
    const double* w = params.data() + layout.layer_offset(l);
    const double* b = w + static_cast<size_t>(in) * out;
    std::vector<double> z(static_cast<size_t>(out));
    for (int o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = w + static_cast<size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += row[i] * act[static_cast<size_t>(i)];
      z[static_cast<size_t>(o)] = acc;
    }
    if (cache) cache->preactivations.push_back(z);
    if (l < layout.num_layers() - 1)
      for (double& v : z) v = elu(v);
    act = std::move(z);
    if (cache) cache->activations.push_back(act);
  }
  return act;
}

inline double softmax_cross_entropy(std::span<const double> logits, int label,
                                    std::vector<double>* probs = nullptr) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double denom = 0.0;
  for (double v : logits) denom += std::exp(v - mx);
  if (probs) {
    probs->resize(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) (*probs)[i] = std::exp(logits[i] - mx) / denom;
  }
  return std::log(denom) - (logits[static_cast<size_t>(label)] - mx);
}

// Mean softmax cross-entropy over the batch and its gradient over the full
// flat parameter vector, reverse mode.
inline double loss_and_grad(const ParamLayout& layout, const std::vector<double>& params,
                            const Dataset& data, std::span<const int> rows,
                            std::vector<double>& grad) {
  if (rows.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
  grad.assign(static_cast<size_t>(layout.total), 0.0);
  const double inv_batch = 1.0 / static_cast<double>(rows.size());
  double loss = 0.0;
  ForwardCache cache;
  std::vector<double> probs;
  for (int r : rows) {
    auto logits = forward(layout, params, data.row(r), &cache);
    loss += softmax_cross_entropy(logits, data.labels[r], &probs);
    // delta on the output layer
    std::vector<double> delta(probs.size());
    for (size_t c = 0; c < probs.size(); ++c) delta[c] = probs[c] * inv_batch;
    delta[static_cast<size_t>(data.labels[r])] -= inv_batch;
    for (int l = layout.num_layers() - 1; l >= 0; --l) {
      const int in = layout.layer_sizes[l];
      const int out = layout.layer_sizes[l + 1];
      double* gw = grad.data() + layout.layer_offset(l);
      double* gb = gw + static_cast<size_t>(in) * out;
      const auto& a_in = cache.activations[static_cast<size_t>(l)];
      for (int o = 0; o < out; ++o) {
        double* grow = gw + static_cast<size_t>(o) * in;
        for (int i = 0; i < in; ++i) grow[i] += delta[static_cast<size_t>(o)] * a_in[static_cast<size_t>(i)];
        gb[o] += delta[static_cast<size_t>(o)];
      }
      if (l > 0) {
        const double* w = params.data() + layout.layer_offset(l);
        const auto& z_prev = cache.preactivations[static_cast<size_t>(l - 1)];
        std::vector<double> next(static_cast<size_t>(in), 0.0);
        for (int o = 0; o < out; ++o) {
          const double* row = w + static_cast<size_t>(o) * in;
          for (int i = 0; i < in; ++i) next[static_cast<size_t>(i)] += row[i] * delta[static_cast<size_t>(o)];
        }
        for (int i = 0; i < in; ++i) next[static_cast<size_t>(i)] *= elu_grad(z_prev[static_cast<size_t>(i)]);
        delta = std::move(next);
      }
    }
  }
  return loss * inv_batch;
}

struct OptState {
  std::vector<double> v;  // second-moment accumulator
  double gamma = 0.9;
  double eps = 1e-8;

  explicit OptState(size_t n = 0, double gamma_ = 0.9, double eps_ = 1e-8)
      : v(n, 0.0), gamma(gamma_), eps(eps_) {
    if (!(eps > 0.0)) throw std::invalid_argument("OptState: eps must be positive");
  }
};

// v <- gamma v + (1-gamma) g^2 ; p <- p - eta g / (sqrt(v) + eps)
inline void rmsprop_step(OptState& opt, std::span<double> params, std::span<const double> grad,
                         double eta) {
  if (params.size() != grad.size() || opt.v.size() != params.size())
    throw std::invalid_argument("rmsprop_step: length mismatch");
  if (!(eta >= 0.0)) throw std::invalid_argument("rmsprop_step: eta must be nonnegative");
  for (size_t i = 0; i < params.size(); ++i) {
    opt.v[i] = opt.gamma * opt.v[i] + (1.0 - opt.gamma) * grad[i] * grad[i];
    params[i] -= eta * grad[i] / (std::sqrt(opt.v[i]) + opt.eps);
  }
}

// Central differences over a random 64-coordinate subset plus all head
// coordinates; returns the worst relative error against the analytic gradient.
inline double finite_diff_check(const ParamLayout& layout, std::vector<double> params,
                                const Dataset& data, std::span<const int> rows, double h,
                                std::uint64_t probe_seed = 12345) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_check: h must be positive");
  std::vector<double> analytic;
  loss_and_grad(layout, params, data, rows, analytic);

  std::vector<int> coords;
  for (int i = layout.n_global; i < layout.total; ++i) coords.push_back(i);
  std::mt19937_64 rng(probe_seed);
  if (layout.n_global > 0) {
    std::uniform_int_distribution<int> pick(0, layout.n_global - 1);
    for (int k = 0; k < 64 && k < layout.n_global; ++k) coords.push_back(pick(rng));
  }

  double worst = 0.0;
  std::vector<double> scratch;
  for (int c : coords) {
    const double keep = params[static_cast<size_t>(c)];
    params[static_cast<size_t>(c)] = keep + h;
    const double fp = loss_and_grad(layout, params, data, rows, scratch);
    params[static_cast<size_t>(c)] = keep - h;
    const double fm = loss_and_grad(layout, params, data, rows, scratch);
    params[static_cast<size_t>(c)] = keep;
    const double fd = (fp - fm) / (2.0 * h);
    const double an = analytic[static_cast<size_t>(c)];
    const double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
    worst = std::max(worst, rel);
  }
  return worst;
}

// Flat little-endian float64 snapshot with a layout header.
inline void save_params(const ParamLayout& layout, const std::vector<double>& params,
                        std::ostream& out) {
  auto put32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  put32(static_cast<std::uint32_t>(layout.layer_sizes.size()));
  for (int s : layout.layer_sizes) put32(static_cast<std::uint32_t>(s));
  for (double v : params) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
}

inline std::pair<ParamLayout, std::vector<double>> load_params(std::istream& in) {
  auto get32 = [&]() -> std::uint32_t {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("load_params: truncated header");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
  };
  const std::uint32_t n_sizes = get32();
  std::vector<int> sizes(n_sizes);
  for (auto& s : sizes) s = static_cast<int>(get32());
  auto layout = ParamLayout::make(std::move(sizes));
  std::vector<double> params(static_cast<size_t>(layout.total));
  for (double& v : params) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error("load_params: truncated payload");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= std::uint64_t(b[k]) << (8 * k);
    std::memcpy(&v, &bits, 8);
  }
  return {layout, std::move(params)};
}

}  // namespace gatta
