#pragma once

// Experiment orchestration: build a world from a config, run K rounds, emit
// metric/ledger/alpha streams and run metadata, sweep over algorithms and
// trials, and summarize costs.

#include "gatta/config.hpp"
#include "gatta/datagen.hpp"
#include "gatta/netsim.hpp"
#include "gatta/nn.hpp"
#include "gatta/protocols.hpp"
#include "gatta/theory.hpp"
#include "gatta/topology.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace gatta {

struct MetricRow {
  int round = 0;
  int agent = 0;
  double train_loss = 0.0;
  double test_acc = 0.0;
  long long comm_global = 0;
  long long comm_head = 0;
};

struct AlphaRow {
  int round = 0;
  int agent = 0;
  int neighbor = 0;
  double alpha = 0.0;
};

struct ValidationReport {
  double rho = 0.0;
  double gap = 0.0;
  bool spectral_gap_ok = false;
  double l_estimate = 0.0;
  double c_k = 0.0;
  double lr_gate_value = 0.0;
  double eta = 0.0;
  bool eta_within_gate = false;
  double c_upper = 0.0;
  double c_chosen = 0.0;  // 0 when the contraction-constant window is empty
  double mu = 0.0;
  std::vector<double> mu_bounds;
  bool mu_above_all_bounds = true;

  std::string text() const {
    std::ostringstream out;
    out << "theory validation\n";
    out << "  rho = " << rho << "  spectral gap = " << gap
        << "  spectral gap check (rho < 1): " << (spectral_gap_ok ? "ok" : "VIOLATED") << "\n";
    out << "  L estimate = " << l_estimate << "  C_K = " << c_k
        << "  lr gate = " << lr_gate_value << "  eta = " << eta
        << "  within gate: " << (eta_within_gate ? "yes" : "no (advisory)") << "\n";
    out << "  contraction-constant window (0, " << c_upper << ")  chosen c = " << c_chosen << "\n";
    double worst = 0.0;
    for (double b : mu_bounds) worst = std::max(worst, b);
    out << "  mu = " << mu << "  max node mu lower bound = " << worst
        << "  mu >= all bounds: " << (mu_above_all_bounds ? "yes" : "no (advisory)") << "\n";
    return out.str();
  }

  nlohmann::json to_json() const {
    return {{"rho", rho},
            {"spectral_gap", gap},
            {"spectral_gap_ok", spectral_gap_ok},
            {"l_estimate", l_estimate},
            {"c_k", c_k},
            {"lr_gate", lr_gate_value},
            {"eta", eta},
            {"eta_within_gate", eta_within_gate},
            {"c_upper", c_upper},
            {"c_chosen", c_chosen},
            {"mu", mu},
            {"mu_bounds", mu_bounds},
            {"mu_above_all_bounds", mu_above_all_bounds}};
  }
};

struct RunOutput {
  ExperimentConfig cfg;
  ParamLayout layout;
  Graph graph;
  std::vector<MetricRow> metrics;
  std::vector<AlphaRow> alphas;
  CommLedger ledger;
  ValidationReport validation;
  std::vector<int> steps_per_agent;
  std::vector<double> mean_grad_norms;  // one entry per round, averaged over agents
  RateReport rate_fit;                  // advisory slope of the min-norm decay
  double final_mean_acc = 0.0;
  double wall_clock_sec = 0.0;
};

inline Graph build_topology(const TopologySpec& spec) {
  if (spec.kind == "erdos_renyi") return gen_erdos_renyi(spec.n, spec.p, spec.seed);
  if (spec.kind == "ring") return gen_ring(spec.n);
  throw std::invalid_argument("build_topology: unknown kind " + spec.kind);
}

inline ShardAssignment build_data(const DataSpec& spec, int n_agents) {
  if (spec.regime == "label_skew") {
    auto base = gen_gaussian_mixture(spec.classes, spec.dim, spec.per_class, spec.sep, spec.seed);
    return partition_label_skew(base, n_agents, spec.labels_per_agent, spec.test_frac,
                                mix_seed(spec.seed, 1));
  }
  if (spec.regime == "feature_skew") {
    auto base = gen_gaussian_mixture(spec.classes, spec.dim, spec.per_class, spec.sep, spec.seed);
    return partition_feature_skew(base, n_agents, spec.writers_per_agent, spec.writers,
                                  spec.test_frac, mix_seed(spec.seed, 2));
  }
  if (spec.regime == "idx") {
    auto base = load_idx(spec.images_path, spec.labels_path);
    const int c_i = spec.labels_per_agent > 0 ? spec.labels_per_agent : base.num_classes;
    return partition_label_skew(base, n_agents, c_i, spec.test_frac, mix_seed(spec.seed, 1));
  }
  throw std::invalid_argument("build_data: unknown regime " + spec.regime);
}

// Per-node mu lower bounds at initialization (heads as initialized, before
// any training), the learning-rate gate at an estimated L, and the
// spectral-gap check.
inline ValidationReport validate_setup(const ExperimentConfig& cfg, const Graph& graph,
                                       const MixingMatrix& mixing, const ParamLayout& layout,
                                       const std::vector<Dataset>& train_shards) {
  ValidationReport report;
  report.rho = mixing.rho;
  report.gap = mixing.spectral_gap;
  report.spectral_gap_ok = mixing.rho < 1.0 - 1e-10;
  report.eta = cfg.hyper.eta;
  report.mu = cfg.hyper.mu;

  auto agents = init_agents(layout, graph, cfg.hyper.mu, cfg.seed);
  // populate caches directly; validation never touches the run ledger
  for (auto& a : agents)
    for (int j : graph.neighbors(a.id)) {
      auto head = layout.head(agents[static_cast<size_t>(j)].params);
      a.attn.neighbor_heads[j] = std::vector<double>(head.begin(), head.end());
    }
  report.mu_bounds.resize(agents.size());
  for (auto& a : agents) {
    auto bound = mu_lower_bound(a.attn, a.active_in_vec());
    report.mu_bounds[static_cast<size_t>(a.id)] = bound.bound;
    if (cfg.hyper.mu < bound.bound) report.mu_above_all_bounds = false;
  }

  // smoothness probe: full-batch gradient secants on agent 0's shard across
  // a few of the distinct initial parameter vectors
  std::vector<std::vector<double>> points;
  for (size_t i = 0; i < agents.size() && i < 4; ++i) points.push_back(agents[i].params);
  const Dataset& probe_shard = train_shards.front();
  auto grad_fn = [&](const std::vector<double>& p) {
    std::vector<int> rows(static_cast<size_t>(probe_shard.size()));
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<double> g;
    loss_and_grad(layout, p, probe_shard, rows, g);
    return g;
  };
  report.l_estimate = estimate_smoothness(grad_fn, points);

  const int n0 = train_shards.front().size();
  const int steps = cfg.hyper.steps_per_epoch > 0
                        ? cfg.hyper.steps_per_epoch
                        : (n0 + cfg.hyper.batch - 1) / cfg.hyper.batch;
  auto table = rho_products(mixing, std::max(cfg.hyper.rounds, 2));
  report.c_k = abc_constants(table, std::max(cfg.hyper.rounds, 2)).c_k;
  if (report.l_estimate > 0.0) {
    report.lr_gate_value = lr_gate(report.l_estimate, steps, report.c_k);
    report.eta_within_gate = cfg.hyper.eta < report.lr_gate_value;
    report.c_upper =
        0.5 - 8.0 * cfg.hyper.eta * cfg.hyper.eta * steps * steps * report.l_estimate * report.l_estimate;
    if (report.c_upper > 0.0) report.c_chosen = report.c_upper / 2.0;
  }
  return report;
}

inline RunOutput run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutput out;
  out.cfg = cfg;
  out.graph = build_topology(cfg.topology);
  MixingMatrix mixing = metropolis_weights(out.graph, cfg.topology.lazy_metropolis);
  auto shards = build_data(cfg.data, out.graph.n);
  out.layout = ParamLayout::make(cfg.layers);
  if (out.layout.input_dim() != shards.train.front().dim)
    throw std::invalid_argument("config: model.layers: input size " +
                                std::to_string(out.layout.input_dim()) +
                                " does not match data dim " +
                                std::to_string(shards.train.front().dim));
  if (out.layout.num_classes() != shards.train.front().num_classes)
    throw std::invalid_argument("config: model.layers: output size " +
                                std::to_string(out.layout.num_classes()) +
                                " does not match class count " +
                                std::to_string(shards.train.front().num_classes));

  out.validation = validate_setup(cfg, out.graph, mixing, out.layout, shards.train);

  auto agents = init_agents(out.layout, out.graph, cfg.hyper.mu, cfg.seed);
  MessageBus bus(out.graph, &out.ledger);
  const Algorithm alg = cfg.algorithm;
  const bool attention_alg = alg == Algorithm::gatta || alg == Algorithm::ce_gatta;
  if (attention_alg) bootstrap_exchange_heads(agents, out.layout, bus);
  std::vector<double> taus;
  if (alg == Algorithm::ce_gatta) taus = cfg.taus_for(out.graph);
  std::vector<TrackerState> trackers(agents.size());

  out.steps_per_agent.resize(agents.size());
  for (size_t i = 0; i < agents.size(); ++i)
    out.steps_per_agent[i] =
        cfg.hyper.steps_per_epoch > 0
            ? cfg.hyper.steps_per_epoch
            : (shards.train[i].size() + cfg.hyper.batch - 1) / cfg.hyper.batch;

  const int total_rounds =
      cfg.hyper.rounds + (alg == Algorithm::dsgd_ft ? cfg.hyper.ft_epochs : 0);
  const double eta = cfg.hyper.eta;
  const int batch = cfg.hyper.batch;
  // config 0 means "derive from shard size"; the protocol layer uses -1 for that
  const int steps = cfg.hyper.steps_per_epoch > 0 ? cfg.hyper.steps_per_epoch : -1;

  for (int r = 1; r <= total_rounds; ++r) {
    RoundResult rr;
    switch (alg) {
      case Algorithm::gatta:
        rr = round_gatta(agents, out.layout, out.graph, mixing, bus, shards.train, eta, batch,
                         steps, r, false);
        break;
      case Algorithm::ce_gatta:
        rr = round_gatta(agents, out.layout, out.graph, mixing, bus, shards.train, eta, batch,
                         steps, r, true, taus);
        break;
      case Algorithm::dsgd:
        rr = round_dsgd(agents, out.layout, out.graph, mixing, bus, shards.train, eta, batch,
                        steps, r);
        break;
      case Algorithm::fl:
        rr = round_fl(agents, out.layout, &out.ledger, shards.train, eta, batch, steps, r);
        break;
      case Algorithm::il:
        rr = round_il(agents, out.layout, shards.train, eta, batch, steps);
        break;
      case Algorithm::repdl:
        rr = round_repdl(agents, out.layout, out.graph, mixing, bus, shards.train, eta, batch,
                         steps, r);
        break;
      case Algorithm::dsgd_ft:
        rr = (r <= cfg.hyper.rounds)
                 ? round_dsgd(agents, out.layout, out.graph, mixing, bus, shards.train, eta,
                              batch, steps, r)
                 : round_il(agents, out.layout, shards.train, eta, batch, steps);
        break;
      case Algorithm::gt_dsgd:
        rr = round_gt_dsgd(agents, trackers, out.layout, out.graph, mixing, bus, shards.train, r);
        break;
    }
    auto sent = out.ledger.per_agent_sent(r, out.graph.n);
    double acc_sum = 0.0, gnorm_sum = 0.0;
    for (const auto& a : agents) {
      MetricRow row;
      row.round = r;
      row.agent = a.id;
      row.train_loss = rr.stats[static_cast<size_t>(a.id)].mean_loss;
      row.test_acc = evaluate_accuracy(out.layout, a.params, shards.test[static_cast<size_t>(a.id)]);
      row.comm_global = sent[static_cast<size_t>(a.id)].global_scalars;
      row.comm_head = sent[static_cast<size_t>(a.id)].head_scalars;
      acc_sum += row.test_acc;
      gnorm_sum += rr.stats[static_cast<size_t>(a.id)].mean_grad_norm;
      out.metrics.push_back(row);
    }
    if (r == total_rounds) out.final_mean_acc = acc_sum / static_cast<double>(agents.size());
    out.mean_grad_norms.push_back(gnorm_sum / static_cast<double>(agents.size()));
    for (const auto& a : rr.alphas) out.alphas.push_back({r, a.agent, a.neighbor, a.alpha});
  }
  out.rate_fit = check_rate(out.mean_grad_norms);
  out.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

struct ConstantEstimates {
  double l = 0.0;      // smoothness
  double chi = 0.0;    // minibatch gradient noise
  double kappa = 0.0;  // cross-agent gradient heterogeneity
};

// Empirical estimates of the diagnostic constants, evaluated on the actual
// shards at shared parameter points. Heuristic lower bounds: secants for L,
// minibatch-vs-full-batch deviations for chi, cross-agent full-batch spread
// (global slice) for kappa.
inline ConstantEstimates estimate_constants(const ParamLayout& layout,
                                            const std::vector<Dataset>& shards,
                                            const std::vector<std::vector<double>>& points,
                                            int minibatch, int probes, std::uint64_t seed) {
  if (shards.empty() || points.empty())
    throw std::invalid_argument("estimate_constants: need shards and evaluation points");
  auto full_grad = [&](const Dataset& shard, const std::vector<double>& p) {
    std::vector<int> rows(static_cast<size_t>(shard.size()));
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<double> g;
    loss_and_grad(layout, p, shard, rows, g);
    return g;
  };

  ConstantEstimates out;
  for (const auto& shard : shards) {
    auto grad_fn = [&](const std::vector<double>& p) { return full_grad(shard, p); };
    out.l = std::max(out.l, estimate_smoothness(grad_fn, points));
  }

  const int mb = std::max(1, minibatch);
  // without replacement, so a probe of >= n_i rows is exactly the full batch
  auto minibatch_fn = [&](const Dataset& shard) {
    return [&shard, &layout, mb](const std::vector<double>& p, std::mt19937_64& rng) {
      std::vector<int> rows(static_cast<size_t>(shard.size()));
      std::iota(rows.begin(), rows.end(), 0);
      if (mb < shard.size()) {
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(static_cast<size_t>(mb));
      }
      std::vector<double> g;
      loss_and_grad(layout, p, shard, rows, g);
      return g;
    };
  };
  std::mt19937_64 seeder(seed);
  for (const auto& shard : shards) {
    auto full_fn = [&](const std::vector<double>& p) { return full_grad(shard, p); };
    out.chi = std::max(out.chi, estimate_gradient_noise(full_fn, minibatch_fn(shard), points,
                                                        probes, seeder()));
  }

  std::vector<std::function<std::vector<double>(const std::vector<double>&)>> agent_fns;
  for (const auto& shard : shards)
    agent_fns.emplace_back([&shard, &layout](const std::vector<double>& p) {
      std::vector<int> rows(static_cast<size_t>(shard.size()));
      std::iota(rows.begin(), rows.end(), 0);
      std::vector<double> g;
      loss_and_grad(layout, p, shard, rows, g);
      return std::vector<double>(g.begin(), g.begin() + layout.n_global);
    });
  out.kappa = estimate_noniid_degree(agent_fns, points);
  return out;
}

// --- derived run statistics ---

inline double mean_test_acc_at_round(const RunOutput& run, int round) {
  double acc = 0.0;
  int count = 0;
  for (const auto& m : run.metrics)
    if (m.round == round) {
      acc += m.test_acc;
      ++count;
    }
  return count > 0 ? acc / count : 0.0;
}

inline int last_round(const RunOutput& run) {
  int r = 0;
  for (const auto& m : run.metrics) r = std::max(r, m.round);
  return r;
}

// First round whose mean test accuracy reaches the target; -1 if never.
inline int rounds_to_accuracy(const RunOutput& run, double target) {
  for (int r = 1; r <= last_round(run); ++r)
    if (mean_test_acc_at_round(run, r) >= target) return r;
  return -1;
}

// Cumulative parameter scalars (bootstrap included) through the first round
// reaching the target accuracy; the full total when the target is never met.
inline long long cost_to_accuracy(const RunOutput& run, double target) {
  int upto = rounds_to_accuracy(run, target);
  if (upto < 0) upto = last_round(run);
  long long total = 0;
  for (const auto& [round, counts] : run.ledger.per_round)
    if (round <= upto) total += counts.parameter_total();
  return total;
}

// --- file emission ---

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_metrics_jsonl(const std::vector<MetricRow>& metrics, std::ostream& out) {
  for (const auto& m : metrics)
    out << "{\"round\":" << m.round << ",\"agent\":" << m.agent
        << ",\"train_loss\":" << detail::fmt_double(m.train_loss)
        << ",\"test_acc\":" << detail::fmt_double(m.test_acc)
        << ",\"comm_global\":" << m.comm_global << ",\"comm_head\":" << m.comm_head << "}\n";
}

inline void write_alphas_csv(const std::vector<AlphaRow>& alphas, std::ostream& out) {
  out << "round,i,j,alpha\n";
  for (const auto& a : alphas)
    out << a.round << ',' << a.agent << ',' << a.neighbor << ','
        << detail::fmt_double(a.alpha) << '\n';
}

inline nlohmann::json run_meta_json(const RunOutput& run) {
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(config_hash(run.cfg.raw)));
  return {{"config", run.cfg.raw},
          {"config_hash", hash_hex},
          {"algorithm", to_string(run.cfg.algorithm)},
          {"layout",
           {{"n_v", run.layout.total}, {"n_wg", run.layout.n_global}, {"f", run.layout.head_dim}}},
          {"steps_per_agent", run.steps_per_agent},
          {"validation", run.validation.to_json()},
          {"ledger_totals",
           {{"global_scalars", run.ledger.cumulative.global_scalars},
            {"head_scalars", run.ledger.cumulative.head_scalars},
            {"control_messages", run.ledger.cumulative.control_messages}}},
          {"final_mean_test_acc", run.final_mean_acc},
          {"rate_fit", {{"slope", run.rate_fit.slope}, {"points", run.rate_fit.points}}},
          {"rounds", last_round(run)},
          {"wall_clock_sec", run.wall_clock_sec}};
}

inline void write_run_files(const RunOutput& run, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream f(out_dir + "/metrics.jsonl");
    write_metrics_jsonl(run.metrics, f);
  }
  {
    std::ofstream f(out_dir + "/ledger.csv");
    run.ledger.to_csv(f);
  }
  {
    std::ofstream f(out_dir + "/alphas.csv");
    write_alphas_csv(run.alphas, f);
  }
  {
    std::ofstream f(out_dir + "/meta.json");
    f << run_meta_json(run).dump(2) << '\n';
  }
  save_edge_list(run.graph, out_dir + "/topology.edges");
}

// --- sweep ---

struct SweepRun {
  Algorithm algorithm = Algorithm::gatta;
  int trial = 0;
  double final_acc = 0.0;
  std::string dir;
};

struct SweepSummaryRow {
  Algorithm algorithm = Algorithm::gatta;
  int trials = 0;
  double mean_acc = 0.0;
  double half_width = -1.0;  // < 0: n/a (single trial)
};

inline std::vector<SweepSummaryRow> summarize_sweep(const std::vector<SweepRun>& runs) {
  std::vector<SweepSummaryRow> rows;
  for (const auto& r : runs) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const SweepSummaryRow& s) { return s.algorithm == r.algorithm; });
    if (it == rows.end()) {
      rows.push_back({r.algorithm, 0, 0.0, -1.0});
      it = rows.end() - 1;
    }
    it->mean_acc += r.final_acc;
    ++it->trials;
  }
  for (auto& row : rows) {
    row.mean_acc /= row.trials;
    if (row.trials > 1) {
      double ss = 0.0;
      for (const auto& r : runs)
        if (r.algorithm == row.algorithm) {
          const double d = r.final_acc - row.mean_acc;
          ss += d * d;
        }
      const double sd = std::sqrt(ss / (row.trials - 1));
      row.half_width = 1.96 * sd / std::sqrt(static_cast<double>(row.trials));
    }
  }
  return rows;
}

// Runs algorithm x trial with seeds seed_base + trial; each trial is fully
// isolated and may execute on its own thread.
inline std::vector<SweepRun> run_sweep(const ExperimentConfig& base, int trials,
                                       std::uint64_t seed_base, int parallel,
                                       const std::string& out_dir) {
  std::vector<Algorithm> algorithms = base.sweep_algorithms;
  if (algorithms.empty()) algorithms.push_back(base.algorithm);
  struct Job {
    Algorithm alg;
    int trial;
  };
  std::vector<Job> jobs;
  for (auto alg : algorithms)
    for (int t = 0; t < trials; ++t) jobs.push_back({alg, t});
  std::vector<SweepRun> results(jobs.size());

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      const Job job = jobs[idx];
      ExperimentConfig cfg = base;
      cfg.algorithm = job.alg;
      cfg.seed = seed_base + static_cast<std::uint64_t>(job.trial);
      cfg.raw["algorithm"] = to_string(job.alg);
      cfg.raw["seed"] = cfg.seed;
      auto run = run_experiment(cfg);
      SweepRun entry;
      entry.algorithm = job.alg;
      entry.trial = job.trial;
      entry.final_acc = run.final_mean_acc;
      if (!out_dir.empty()) {
        entry.dir = out_dir + "/" + to_string(job.alg) + "_trial" + std::to_string(job.trial);
        write_run_files(run, entry.dir);
      }
      results[idx] = entry;
    }
  };
  const int workers = std::max(1, parallel);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return results;
}

// --- readers for the report/plot commands ---

inline std::vector<MetricRow> read_metrics_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_metrics_jsonl: cannot open " + path);
  std::vector<MetricRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    rows.push_back({j.at("round").get<int>(), j.at("agent").get<int>(),
                    j.at("train_loss").get<double>(), j.at("test_acc").get<double>(),
                    j.at("comm_global").get<long long>(), j.at("comm_head").get<long long>()});
  }
  return rows;
}

inline std::vector<AlphaRow> read_alphas_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_alphas_csv: cannot open " + path);
  std::vector<AlphaRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    AlphaRow row;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%lf", &row.round, &row.agent, &row.neighbor,
                    &row.alpha) == 4)
      rows.push_back(row);
  }
  return rows;
}

struct LedgerCsvRow {
  int round = 0;
  std::string kind;
  long long scalars = 0;
};

inline std::vector<LedgerCsvRow> read_ledger_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_ledger_csv: cannot open " + path);
  std::vector<LedgerCsvRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) continue;
    rows.push_back({std::stoi(line.substr(0, c1)), line.substr(c1 + 1, c2 - c1 - 1),
                    std::stoll(line.substr(c2 + 1))});
  }
  return rows;
}

}  // namespace gatta
