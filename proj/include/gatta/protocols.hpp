#pragma once

// One-round state transitions for GATTA, CE-GATTA and the consensus baselines.

#include "gatta/attention.hpp"
#include "gatta/datagen.hpp"
#include "gatta/netsim.hpp"
#include "gatta/nn.hpp"
#include "gatta/topology.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

namespace gatta {

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 over the combined word
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct AgentState {
  int id = -1;
  std::vector<double> params;  // N_v flat; head slice holds the composed w_ns
  AttentionState attn;         // beta, w_lu, cached heads, mu
  std::set<int> active_in;     // N_{c,i}: neighbors whose heads this agent receives
  std::set<int> active_out;    // neighbors still receiving this agent's head
  OptState opt_global, opt_lu, opt_beta, opt_full;
  std::mt19937_64 rng;  // batch-schedule stream

  std::vector<int> active_in_vec() const { return {active_in.begin(), active_in.end()}; }
};

struct TrackerState {
  std::vector<double> y;          // gradient tracker, length N_v
  std::vector<double> last_grad;  // g_i at the current iterate
  bool initialized = false;
};

struct EpochStats {
  double mean_loss = 0.0;
  double mean_grad_norm = 0.0;  // l2 norm of the per-step gradient, averaged
  int steps = 0;
};

struct AlphaRecord {
  int agent = -1;
  int neighbor = -1;
  double alpha = 0.0;
};

struct RoundResult {
  std::vector<EpochStats> stats;    // per agent
  std::vector<AlphaRecord> alphas;  // GATTA/CE-GATTA epoch-final coefficients
};

// Distinct sub-streams per agent so batch randomness stays aligned across
// algorithms sharing a run seed.
inline std::vector<AgentState> init_agents(const ParamLayout& layout, const Graph& graph,
                                           double mu, std::uint64_t seed) {
  std::vector<AgentState> agents(static_cast<size_t>(graph.n));
  for (int i = 0; i < graph.n; ++i) {
    AgentState& a = agents[static_cast<size_t>(i)];
    a.id = i;
    a.params = init_params(layout, mix_seed(seed, static_cast<std::uint64_t>(i) * 4 + 0));
    a.attn.mu = mu;
    auto head = layout.head(a.params);
    a.attn.w_lu.assign(head.begin(), head.end());
    a.attn.own_prev_head.assign(head.begin(), head.end());
    std::mt19937_64 beta_rng(mix_seed(seed, static_cast<std::uint64_t>(i) * 4 + 1));
    std::uniform_real_distribution<double> beta_dist(-0.1, 0.1);
    a.attn.beta.resize(static_cast<size_t>(2 * layout.head_dim));
    for (double& b : a.attn.beta) b = beta_dist(beta_rng);
    a.rng.seed(mix_seed(seed, static_cast<std::uint64_t>(i) * 4 + 2));
    const auto nb = graph.neighbors(i);
    a.active_in.insert(nb.begin(), nb.end());
    a.active_out.insert(nb.begin(), nb.end());
    a.opt_global = OptState(static_cast<size_t>(layout.n_global));
    a.opt_lu = OptState(static_cast<size_t>(layout.head_dim));
    a.opt_beta = OptState(static_cast<size_t>(2 * layout.head_dim));
    a.opt_full = OptState(static_cast<size_t>(layout.total));
  }
  return agents;
}

// Initial head exchange so neighbor caches are populated before round 1.
// Recorded on the ledger as round 0.
inline void bootstrap_exchange_heads(std::vector<AgentState>& agents, const ParamLayout& layout,
                                     MessageBus& bus) {
  bus.begin_round(0);
  for (auto& a : agents) {
    auto head = layout.head(a.params);
    for (int j : a.active_out)
      bus.send(a.id, j, PayloadKind::head, std::vector<double>(head.begin(), head.end()));
  }
  auto boxes = bus.barrier();
  for (auto& a : agents)
    for (auto& msg : boxes[static_cast<size_t>(a.id)].messages)
      if (msg.kind == PayloadKind::head) a.attn.neighbor_heads[msg.from] = std::move(msg.payload);
}

namespace detail {

// One epoch's batch schedule: a shuffled pass over the shard. An explicit
// step count (>= 0) cycles the shuffled order; steps_override < 0 derives
// ceil(n/batch) steps covering every sample once.
inline std::vector<std::vector<int>> epoch_batches(int n, int batch, int steps_override,
                                                   std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("epoch_batches: empty shard");
  if (batch < 1) throw std::invalid_argument("epoch_batches: batch must be positive");
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const int steps = steps_override >= 0 ? steps_override : (n + batch - 1) / batch;
  std::vector<std::vector<int>> out(static_cast<size_t>(steps));
  if (steps_override >= 0) {
    const int b = std::min(batch, n);
    for (int t = 0; t < steps; ++t) {
      out[static_cast<size_t>(t)].resize(static_cast<size_t>(b));
      for (int s = 0; s < b; ++s)
        out[static_cast<size_t>(t)][static_cast<size_t>(s)] =
            perm[static_cast<size_t>((t * b + s) % n)];
    }
  } else {
    for (int t = 0; t < steps; ++t) {
      const int lo = t * batch;
      const int hi = std::min(n, lo + batch);
      out[static_cast<size_t>(t)].assign(perm.begin() + lo, perm.begin() + hi);
    }
  }
  return out;
}

inline std::vector<double> full_batch_grad(const ParamLayout& layout,
                                           const std::vector<double>& params, const Dataset& shard,
                                           double* loss_out = nullptr) {
  std::vector<int> rows(static_cast<size_t>(shard.size()));
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<double> grad;
  const double loss = loss_and_grad(layout, params, shard, rows, grad);
  if (loss_out) *loss_out = loss;
  return grad;
}

// w_i <- A(i,i) w_i + sum over delivered neighbor payloads of A(i,j) w_j.
// full_vector=false mixes only the global slice.
inline void mix_global_parts(std::vector<AgentState>& agents, const ParamLayout& layout,
                             const MixingMatrix& mixing, const Graph& graph,
                             const std::vector<Mailbox>& boxes, bool full_vector) {
  const int span = full_vector ? layout.total : layout.n_global;
  for (auto& a : agents) {
    std::vector<double> mixed(static_cast<size_t>(span));
    const double self = mixing.weights(a.id, a.id);
    for (int k = 0; k < span; ++k)
      mixed[static_cast<size_t>(k)] = self * a.params[static_cast<size_t>(k)];
    int received = 0;
    for (const auto& msg : boxes[static_cast<size_t>(a.id)].messages) {
      if (msg.kind != PayloadKind::global) continue;
      if (static_cast<int>(msg.payload.size()) != span)
        throw std::logic_error("mix_global_parts: payload span mismatch");
      const double w = mixing.weights(a.id, msg.from);
      for (int k = 0; k < span; ++k)
        mixed[static_cast<size_t>(k)] += w * msg.payload[static_cast<size_t>(k)];
      ++received;
    }
    if (received != graph.degrees[static_cast<size_t>(a.id)])
      throw std::logic_error("mix_global_parts: missing a neighbor's global payload");
    std::copy(mixed.begin(), mixed.end(), a.params.begin());
  }
}

}  // namespace detail

struct GattaEpochResult {
  EpochStats stats;
  AttentionCache final_cache;  // epoch-final coefficients (alphas over active_in)
};

// T SGD steps; every step recomposes the head from the current (w_lu, beta)
// and the cached previous-round heads, backpropagates into w_g, w_lu and beta,
// and applies RMSProp per group. The head is finalized once afterwards.
inline GattaEpochResult local_epoch_gatta(AgentState& agent, const ParamLayout& layout,
                                          const Dataset& shard, double eta, int batch,
                                          int steps_override) {
  if (shard.size() < 1) throw std::invalid_argument("local_epoch_gatta: empty shard");
  if (agent.active_in.empty()) throw std::logic_error("local_epoch_gatta: empty active set");
  const auto active = agent.active_in_vec();
  GattaEpochResult result;
  auto batches = detail::epoch_batches(shard.size(), batch, steps_override, agent.rng);
  std::vector<double> grad;
  for (const auto& rows : batches) {
    auto cache = attention_coeffs(agent.attn, active);
    auto w_ns = fuse_head(agent.attn, cache);
    std::copy(w_ns.begin(), w_ns.end(), layout.head(agent.params).begin());
    const double loss = loss_and_grad(layout, agent.params, shard, rows, grad);
    auto attn_grads = attention_backward(layout.head(grad), agent.attn, cache);
    double g2 = 0.0;
    for (auto v : layout.global(grad)) g2 += v * v;
    for (double v : attn_grads.w_lu) g2 += v * v;
    for (double v : attn_grads.beta) g2 += v * v;
    rmsprop_step(agent.opt_global, layout.global(agent.params), layout.global(grad), eta);
    rmsprop_step(agent.opt_lu, agent.attn.w_lu, attn_grads.w_lu, eta);
    rmsprop_step(agent.opt_beta, agent.attn.beta, attn_grads.beta, eta);
    result.stats.mean_loss += loss;
    result.stats.mean_grad_norm += std::sqrt(g2);
    ++result.stats.steps;
  }
  if (result.stats.steps > 0) {
    result.stats.mean_loss /= result.stats.steps;
    result.stats.mean_grad_norm /= result.stats.steps;
  }
  result.final_cache = attention_coeffs(agent.attn, active);
  auto w_ns = fuse_head(agent.attn, result.final_cache);
  std::copy(w_ns.begin(), w_ns.end(), layout.head(agent.params).begin());
  return result;
}

// Plain local epoch over the full flat vector (D-SGD, FL, IL, RepDL, DSGD-FT).
inline EpochStats local_epoch_plain(AgentState& agent, const ParamLayout& layout,
                                    const Dataset& shard, double eta, int batch,
                                    int steps_override) {
  if (shard.size() < 1) throw std::invalid_argument("local_epoch_plain: empty shard");
  EpochStats stats;
  auto batches = detail::epoch_batches(shard.size(), batch, steps_override, agent.rng);
  std::vector<double> grad;
  for (const auto& rows : batches) {
    const double loss = loss_and_grad(layout, agent.params, shard, rows, grad);
    double g2 = 0.0;
    for (double v : grad) g2 += v * v;
    rmsprop_step(agent.opt_full, agent.params, grad, eta);
    stats.mean_loss += loss;
    stats.mean_grad_norm += std::sqrt(g2);
    ++stats.steps;
  }
  if (stats.steps > 0) {
    stats.mean_loss /= stats.steps;
    stats.mean_grad_norm /= stats.steps;
  }
  return stats;
}

// GATTA round. With ce=true applies CE-GATTA's threshold pruning: epoch-final
// alphas over the active set, newly removed senders are notified (control
// message) before head transmission, and the empty-set guard keeps the
// previous set. Global parts always flow to every neighbor.
inline RoundResult round_gatta(std::vector<AgentState>& agents, const ParamLayout& layout,
                               const Graph& graph, const MixingMatrix& mixing, MessageBus& bus,
                               const std::vector<Dataset>& shards, double eta, int batch,
                               int steps_override, int round, bool ce = false,
                               const std::vector<double>& taus = {}) {
  bus.begin_round(round);
  RoundResult result;
  result.stats.resize(agents.size());
  std::vector<GattaEpochResult> epochs(agents.size());
  for (auto& a : agents) {
    epochs[static_cast<size_t>(a.id)] = local_epoch_gatta(
        a, layout, shards[static_cast<size_t>(a.id)], eta, batch, steps_override);
    result.stats[static_cast<size_t>(a.id)] = epochs[static_cast<size_t>(a.id)].stats;
  }
  for (const auto& a : agents) {
    const auto& cache = epochs[static_cast<size_t>(a.id)].final_cache;
    for (size_t j = 0; j < cache.active.size(); ++j)
      result.alphas.push_back({a.id, cache.active[j], cache.alphas[j]});
  }

  if (ce) {
    if (taus.size() != agents.size())
      throw std::invalid_argument("round_gatta: ce requires one tau per agent");
    for (auto& a : agents) {
      const auto& cache = epochs[static_cast<size_t>(a.id)].final_cache;
      std::vector<int> removed;
      for (size_t j = 0; j < cache.active.size(); ++j)
        if (cache.alphas[j] < taus[static_cast<size_t>(a.id)]) removed.push_back(cache.active[j]);
      if (removed.size() == a.active_in.size()) continue;  // empty-set guard: keep previous set
      for (int j : removed) {
        a.active_in.erase(j);
        bus.send(a.id, j, PayloadKind::control, {});
        agents[static_cast<size_t>(j)].active_out.erase(a.id);
      }
    }
  }

  for (auto& a : agents) {
    auto global = layout.global(a.params);
    for (int j : graph.neighbors(a.id))
      bus.send(a.id, j, PayloadKind::global, std::vector<double>(global.begin(), global.end()));
    auto head = layout.head(a.params);
    for (int j : a.active_out)
      bus.send(a.id, j, PayloadKind::head, std::vector<double>(head.begin(), head.end()));
  }
  auto boxes = bus.barrier();
  detail::mix_global_parts(agents, layout, mixing, graph, boxes, /*full_vector=*/false);
  for (auto& a : agents) {
    auto head = layout.head(a.params);
    a.attn.own_prev_head.assign(head.begin(), head.end());
    for (auto& msg : boxes[static_cast<size_t>(a.id)].messages)
      if (msg.kind == PayloadKind::head) a.attn.neighbor_heads[msg.from] = std::move(msg.payload);
  }
  return result;
}

// D-SGD: one plain local epoch, then gossip averaging of the full vector.
inline RoundResult round_dsgd(std::vector<AgentState>& agents, const ParamLayout& layout,
                              const Graph& graph, const MixingMatrix& mixing, MessageBus& bus,
                              const std::vector<Dataset>& shards, double eta, int batch,
                              int steps_override, int round) {
  bus.begin_round(round);
  RoundResult result;
  result.stats.resize(agents.size());
  for (auto& a : agents)
    result.stats[static_cast<size_t>(a.id)] = local_epoch_plain(
        a, layout, shards[static_cast<size_t>(a.id)], eta, batch, steps_override);
  for (auto& a : agents)
    for (int j : graph.neighbors(a.id))
      bus.send(a.id, j, PayloadKind::global,
               std::vector<double>(a.params.begin(), a.params.end()));
  auto boxes = bus.barrier();
  detail::mix_global_parts(agents, layout, mixing, graph, boxes, /*full_vector=*/true);
  return result;
}

// Centralized FedAvg: local epochs, n_i-weighted server average, broadcast.
// The server is not a graph node; its up/down traffic is recorded directly on
// the ledger with id -1.
inline RoundResult round_fl(std::vector<AgentState>& agents, const ParamLayout& layout,
                            CommLedger* ledger, const std::vector<Dataset>& shards, double eta,
                            int batch, int steps_override, int round) {
  RoundResult result;
  result.stats.resize(agents.size());
  for (auto& a : agents)
    result.stats[static_cast<size_t>(a.id)] = local_epoch_plain(
        a, layout, shards[static_cast<size_t>(a.id)], eta, batch, steps_override);
  std::vector<double> avg(static_cast<size_t>(layout.total), 0.0);
  double total_weight = 0.0;
  for (const auto& a : agents) total_weight += shards[static_cast<size_t>(a.id)].size();
  for (const auto& a : agents) {
    const double w = shards[static_cast<size_t>(a.id)].size() / total_weight;
    for (size_t k = 0; k < avg.size(); ++k) avg[k] += w * a.params[k];
    if (ledger)
      ledger->record(round, a.id, -1, PayloadKind::global, static_cast<size_t>(layout.total));
  }
  for (auto& a : agents) {
    a.params = avg;
    if (ledger)
      ledger->record(round, -1, a.id, PayloadKind::global, static_cast<size_t>(layout.total));
  }
  return result;
}

// Independent learning: local epoch only, nothing transmitted.
inline RoundResult round_il(std::vector<AgentState>& agents, const ParamLayout& layout,
                            const std::vector<Dataset>& shards, double eta, int batch,
                            int steps_override) {
  RoundResult result;
  result.stats.resize(agents.size());
  for (auto& a : agents)
    result.stats[static_cast<size_t>(a.id)] = local_epoch_plain(
        a, layout, shards[static_cast<size_t>(a.id)], eta, batch, steps_override);
  return result;
}

// RepDL: global part mixed as in D-SGD, head trained purely locally.
inline RoundResult round_repdl(std::vector<AgentState>& agents, const ParamLayout& layout,
                               const Graph& graph, const MixingMatrix& mixing, MessageBus& bus,
                               const std::vector<Dataset>& shards, double eta, int batch,
                               int steps_override, int round) {
  bus.begin_round(round);
  RoundResult result;
  result.stats.resize(agents.size());
  for (auto& a : agents)
    result.stats[static_cast<size_t>(a.id)] = local_epoch_plain(
        a, layout, shards[static_cast<size_t>(a.id)], eta, batch, steps_override);
  for (auto& a : agents) {
    auto global = layout.global(a.params);
    for (int j : graph.neighbors(a.id))
      bus.send(a.id, j, PayloadKind::global, std::vector<double>(global.begin(), global.end()));
  }
  auto boxes = bus.barrier();
  detail::mix_global_parts(agents, layout, mixing, graph, boxes, /*full_vector=*/false);
  return result;
}

// Gradient tracking with decaying step size eta_k = 1/(10 + sqrt(k)):
//   x_i <- sum_j A(i,j) (x_j - eta_k y_j)
//   y_i <- sum_j A(i,j) y_j + g_i(x_i_new) - g_i(x_i_old)
// Full-batch gradients, one step per round; trackers start at the first local
// gradients.
inline double gt_dsgd_step_size(int round) { return 1.0 / (10.0 + std::sqrt(double(round))); }

inline RoundResult round_gt_dsgd(std::vector<AgentState>& agents,
                                 std::vector<TrackerState>& trackers, const ParamLayout& layout,
                                 const Graph& graph, const MixingMatrix& mixing, MessageBus& bus,
                                 const std::vector<Dataset>& shards, int round) {
  if (trackers.size() != agents.size())
    throw std::invalid_argument("round_gt_dsgd: tracker count mismatch");
  bus.begin_round(round);
  RoundResult result;
  result.stats.resize(agents.size());
  const double eta_k = gt_dsgd_step_size(round);
  for (auto& a : agents) {
    auto& t = trackers[static_cast<size_t>(a.id)];
    if (!t.initialized) {
      t.last_grad =
          detail::full_batch_grad(layout, a.params, shards[static_cast<size_t>(a.id)], nullptr);
      t.y = t.last_grad;
      t.initialized = true;
    }
  }
  for (auto& a : agents) {
    const auto& t = trackers[static_cast<size_t>(a.id)];
    std::vector<double> step(a.params.size());
    for (size_t k = 0; k < step.size(); ++k) step[k] = a.params[k] - eta_k * t.y[k];
    for (int j : graph.neighbors(a.id)) {
      bus.send(a.id, j, PayloadKind::global, step);
      bus.send(a.id, j, PayloadKind::global, t.y);
    }
  }
  auto boxes = bus.barrier();
  for (auto& a : agents) {
    auto& t = trackers[static_cast<size_t>(a.id)];
    const double self = mixing.weights(a.id, a.id);
    std::vector<double> new_x(a.params.size()), new_y(a.params.size());
    for (size_t k = 0; k < a.params.size(); ++k) {
      new_x[k] = self * (a.params[k] - eta_k * t.y[k]);
      new_y[k] = self * t.y[k];
    }
    const auto& msgs = boxes[static_cast<size_t>(a.id)].messages;
    // per sender: first payload is the position step, second the tracker
    for (size_t m = 0; m < msgs.size(); m += 2) {
      if (m + 1 >= msgs.size() || msgs[m].from != msgs[m + 1].from)
        throw std::logic_error("round_gt_dsgd: expected paired payloads per sender");
      const double w = mixing.weights(a.id, msgs[m].from);
      for (size_t k = 0; k < new_x.size(); ++k) {
        new_x[k] += w * msgs[m].payload[k];
        new_y[k] += w * msgs[m + 1].payload[k];
      }
    }
    a.params = std::move(new_x);
    double loss = 0.0;
    auto g_new =
        detail::full_batch_grad(layout, a.params, shards[static_cast<size_t>(a.id)], &loss);
    for (size_t k = 0; k < new_y.size(); ++k) new_y[k] += g_new[k] - t.last_grad[k];
    double g2 = 0.0;
    for (double v : g_new) g2 += v * v;
    t.y = std::move(new_y);
    t.last_grad = std::move(g_new);
    result.stats[static_cast<size_t>(a.id)].mean_loss = loss;
    result.stats[static_cast<size_t>(a.id)].mean_grad_norm = std::sqrt(g2);
    result.stats[static_cast<size_t>(a.id)].steps = 1;
  }
  return result;
}

// Classification accuracy of an agent's current parameters on a shard.
inline double evaluate_accuracy(const ParamLayout& layout, const std::vector<double>& params,
                                const Dataset& shard) {
  if (shard.size() == 0) return 0.0;
  int hits = 0;
  for (int i = 0; i < shard.size(); ++i) {
    auto logits = forward(layout, params, shard.row(i));
    int best = 0;
    for (size_t c = 1; c < logits.size(); ++c)
      if (logits[c] > logits[static_cast<size_t>(best)]) best = static_cast<int>(c);
    if (best == shard.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / shard.size();
}

}  // namespace gatta
