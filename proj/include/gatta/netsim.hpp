#pragma once

// Synchronous in-process message bus and the communication ledger reproducing
// the scalar-count cost metric.

#include "gatta/nn.hpp"
#include "gatta/topology.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gatta {

enum class Algorithm { gatta, ce_gatta, dsgd, fl, il, repdl, dsgd_ft, gt_dsgd };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::gatta: return "gatta";
    case Algorithm::ce_gatta: return "ce_gatta";
    case Algorithm::dsgd: return "dsgd";
    case Algorithm::fl: return "fl";
    case Algorithm::il: return "il";
    case Algorithm::repdl: return "repdl";
    case Algorithm::dsgd_ft: return "dsgd_ft";
    case Algorithm::gt_dsgd: return "gt_dsgd";
  }
  throw std::logic_error("to_string: bad algorithm");
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "gatta") return Algorithm::gatta;
  if (s == "ce_gatta") return Algorithm::ce_gatta;
  if (s == "dsgd") return Algorithm::dsgd;
  if (s == "fl") return Algorithm::fl;
  if (s == "il") return Algorithm::il;
  if (s == "repdl") return Algorithm::repdl;
  if (s == "dsgd_ft") return Algorithm::dsgd_ft;
  if (s == "gt_dsgd") return Algorithm::gt_dsgd;
  throw std::invalid_argument("unknown algorithm: " + s);
}

enum class PayloadKind { global, head, control };

struct Message {
  int from = -1;
  int to = -1;
  PayloadKind kind = PayloadKind::control;
  std::vector<double> payload;
};

struct Mailbox {
  std::vector<Message> messages;  // sorted by sender id after the barrier
};

struct CommLedger {
  struct Counts {
    long long global_scalars = 0;
    long long head_scalars = 0;
    long long control_messages = 0;

    long long parameter_total() const { return global_scalars + head_scalars; }
    Counts& operator+=(const Counts& o) {
      global_scalars += o.global_scalars;
      head_scalars += o.head_scalars;
      control_messages += o.control_messages;
      return *this;
    }
  };

  std::map<int, Counts> per_round;
  std::map<int, std::map<std::pair<int, int>, Counts>> per_edge;  // round -> (from,to) -> counts
  Counts cumulative;

  void record(int round, int from, int to, PayloadKind kind, size_t count) {
    Counts delta;
    switch (kind) {
      case PayloadKind::global: delta.global_scalars = static_cast<long long>(count); break;
      case PayloadKind::head: delta.head_scalars = static_cast<long long>(count); break;
      case PayloadKind::control: delta.control_messages = 1; break;  // counted as one unit
    }
    per_round[round] += delta;
    per_edge[round][{from, to}] += delta;
    cumulative += delta;
  }

  Counts round_counts(int round) const {
    auto it = per_round.find(round);
    return it == per_round.end() ? Counts{} : it->second;
  }

  // scalars sent by each agent in a round, for the per-agent metric stream
  std::vector<Counts> per_agent_sent(int round, int n_agents) const {
    std::vector<Counts> out(static_cast<size_t>(n_agents));
    auto it = per_edge.find(round);
    if (it == per_edge.end()) return out;
    for (const auto& [edge, counts] : it->second)
      if (edge.first >= 0 && edge.first < n_agents) out[static_cast<size_t>(edge.first)] += counts;
    return out;
  }

  // CSV export: round,kind,scalars (control rows carry message counts)
  void to_csv(std::ostream& out) const {
    out << "round,kind,scalars\n";
    for (const auto& [round, counts] : per_round) {
      out << round << ",global," << counts.global_scalars << '\n';
      out << round << ",head," << counts.head_scalars << '\n';
      out << round << ",control," << counts.control_messages << '\n';
    }
  }
};

// Queued sends become visible only at the barrier; delivery is exactly-once
// and mailbox order is sorted by sender id.
class MessageBus {
 public:
  MessageBus(const Graph& graph, CommLedger* ledger) : graph_(&graph), ledger_(ledger) {}

  void begin_round(int round) { round_ = round; }
  int round() const { return round_; }

  void send(int from, int to, PayloadKind kind, std::vector<double> payload) {
    if (from < 0 || to < 0 || from >= graph_->n || to >= graph_->n || !graph_->edge(from, to))
      throw std::logic_error("bus: send across a non-edge (" + std::to_string(from) + " -> " +
                             std::to_string(to) + ")");
    if (ledger_) ledger_->record(round_, from, to, kind, payload.size());
    pending_.push_back(Message{from, to, kind, std::move(payload)});
    ++sent_;
  }

  std::vector<Mailbox> barrier() {
    std::vector<Mailbox> boxes(static_cast<size_t>(graph_->n));
    for (auto& msg : pending_) {
      boxes[static_cast<size_t>(msg.to)].messages.push_back(std::move(msg));
      ++delivered_;
    }
    pending_.clear();
    for (auto& box : boxes)
      std::stable_sort(box.messages.begin(), box.messages.end(),
                       [](const Message& a, const Message& b) { return a.from < b.from; });
    return boxes;
  }

  long long sent() const { return sent_; }
  long long delivered() const { return delivered_; }

 private:
  const Graph* graph_;
  CommLedger* ledger_;
  int round_ = 0;
  std::vector<Message> pending_;
  long long sent_ = 0;
  long long delivered_ = 0;
};

struct ExpectedCost {
  long long global_scalars = 0;
  long long head_scalars = 0;

  long long total() const { return global_scalars + head_scalars; }
};

// Closed-form per-round scalar counts that the observed ledger must match
// exactly. active_out_sizes[i] = number of neighbors still receiving agent i's
// head (CE-GATTA); ignored elsewhere. finetune_phase marks DSGD-FT's local
// epochs (no communication).
inline ExpectedCost expected_cost_per_round(Algorithm alg, const Graph& g,
                                            const ParamLayout& layout,
                                            const std::vector<int>& active_out_sizes = {},
                                            bool finetune_phase = false) {
  long long degree_sum = 0;
  for (int d : g.degrees) degree_sum += d;
  const long long n_v = layout.total;
  const long long n_wg = layout.n_global;
  const long long f = layout.head_dim;
  ExpectedCost cost;
  switch (alg) {
    case Algorithm::dsgd:
      cost.global_scalars = degree_sum * n_v;
      break;
    case Algorithm::dsgd_ft:
      if (!finetune_phase) cost.global_scalars = degree_sum * n_v;
      break;
    case Algorithm::gt_dsgd:
      cost.global_scalars = degree_sum * 2 * n_v;
      break;
    case Algorithm::gatta:
      cost.global_scalars = degree_sum * n_wg;
      cost.head_scalars = degree_sum * f;
      break;
    case Algorithm::ce_gatta: {
      cost.global_scalars = degree_sum * n_wg;
      long long active = 0;
      for (int a : active_out_sizes) active += a;
      cost.head_scalars = active * f;
      break;
    }
    case Algorithm::repdl:
      cost.global_scalars = degree_sum * n_wg;
      break;
    case Algorithm::fl:
      // centralized: every agent uploads and downloads the full vector
      cost.global_scalars = 2LL * g.n * n_v;
      break;
    case Algorithm::il:
      break;
  }
  return cost;
}

// Parameters each agent updates per round: w_g, w_lu and beta for the
// attention methods gives N_v + 2F; gradient tracking doubles the plain count.
inline long long updated_param_count(Algorithm alg, const ParamLayout& layout) {
  switch (alg) {
    case Algorithm::gatta:
    case Algorithm::ce_gatta:
      return static_cast<long long>(layout.total) + 2LL * layout.head_dim;
    case Algorithm::gt_dsgd:
      return 2LL * layout.total;
    default:
      return layout.total;
  }
}

}  // namespace gatta
