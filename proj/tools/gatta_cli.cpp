// Command-line front end: run / sweep / report / plot / validate / gen-topology.

#include "gatta/runner.hpp"
#include "gatta/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  auto cfg = gatta::load_config(config_path);
  auto run = gatta::run_experiment(cfg);
  gatta::write_run_files(run, out_dir);
  std::cout << gatta::to_string(cfg.algorithm) << ": " << gatta::last_round(run)
            << " rounds, final mean test accuracy "
            << static_cast<int>(run.final_mean_acc * 1000) / 10.0 << "%\n";
  std::cout << "ledger: " << run.ledger.cumulative.global_scalars << " global + "
            << run.ledger.cumulative.head_scalars << " head scalars, "
            << run.ledger.cumulative.control_messages << " control messages\n";
  std::cout << run.validation.text();
  std::cout << "outputs written to " << out_dir << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int trials,
              std::uint64_t seed_base, int parallel) {
  auto cfg = gatta::load_config(config_path);
  if (trials <= 0) trials = cfg.trials;
  auto runs = gatta::run_sweep(cfg, trials, seed_base, parallel, out_dir);
  auto rows = gatta::summarize_sweep(runs);
  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir + "/sweep.csv");
  csv << "algorithm,trials,mean_test_acc,ci95_half_width\n";
  std::printf("%-10s %7s %14s %16s\n", "algorithm", "trials", "mean test acc", "95% half-width");
  for (const auto& row : rows) {
    if (row.half_width >= 0.0) {
      std::printf("%-10s %7d %13.2f%% %15.2f%%\n", gatta::to_string(row.algorithm).c_str(),
                  row.trials, 100.0 * row.mean_acc, 100.0 * row.half_width);
      csv << gatta::to_string(row.algorithm) << ',' << row.trials << ',' << row.mean_acc << ','
          << row.half_width << '\n';
    } else {
      std::printf("%-10s %7d %13.2f%% %15s\n", gatta::to_string(row.algorithm).c_str(), row.trials,
                  100.0 * row.mean_acc, "n/a");
      csv << gatta::to_string(row.algorithm) << ',' << row.trials << ',' << row.mean_acc
          << ",n/a\n";
    }
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs) {
  struct Entry {
    std::string dir, algorithm;
    long long total = 0;
    double acc = 0.0;
  };
  std::vector<Entry> entries;
  for (const auto& dir : run_dirs) {
    std::ifstream in(dir + "/meta.json");
    if (!in) {
      std::cerr << "report: cannot open " << dir << "/meta.json\n";
      return 1;
    }
    nlohmann::json meta;
    in >> meta;
    Entry e;
    e.dir = dir;
    e.algorithm = meta.at("algorithm").get<std::string>();
    const auto& totals = meta.at("ledger_totals");
    e.total = totals.at("global_scalars").get<long long>() +
              totals.at("head_scalars").get<long long>();
    e.acc = meta.at("final_mean_test_acc").get<double>();
    entries.push_back(e);
  }
  std::printf("%-10s %18s %14s  %s\n", "algorithm", "total scalars", "final acc", "dir");
  for (const auto& e : entries)
    std::printf("%-10s %18lld %13.2f%%  %s\n", e.algorithm.c_str(), e.total, 100.0 * e.acc,
                e.dir.c_str());
  const Entry* dsgd = nullptr;
  const Entry* ce = nullptr;
  for (const auto& e : entries) {
    if (e.algorithm == "dsgd" && !dsgd) dsgd = &e;
    if (e.algorithm == "ce_gatta" && !ce) ce = &e;
  }
  if (dsgd && ce && dsgd->total > 0) {
    const double reduction = 100.0 * (1.0 - static_cast<double>(ce->total) / dsgd->total);
    std::printf("reduction (1 - ce_gatta/dsgd): %.1f%%\n", reduction);
  }
  return 0;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out_dir, int alpha_node) {
  std::filesystem::create_directories(out_dir);
  std::vector<gatta::Series> acc_series, cost_series, alpha_series;
  for (const auto& path : inputs) {
    const auto name = std::filesystem::path(path).parent_path().filename().string();
    if (path.size() > 6 && path.substr(path.size() - 6) == ".jsonl") {
      auto rows = gatta::read_metrics_jsonl(path);
      std::map<int, std::pair<double, int>> acc;
      for (const auto& r : rows) {
        acc[r.round].first += r.test_acc;
        acc[r.round].second += 1;
      }
      gatta::Series s{name.empty() ? path : name, {}};
      for (const auto& [round, sum] : acc)
        s.points.emplace_back(round, sum.first / sum.second);
      acc_series.push_back(std::move(s));
    } else if (path.size() > 4 && path.substr(path.size() - 4) == ".csv" &&
               path.find("alphas") != std::string::npos) {
      auto rows = gatta::read_alphas_csv(path);
      std::map<int, gatta::Series> per_neighbor;
      for (const auto& r : rows) {
        if (r.agent != alpha_node) continue;
        auto& s = per_neighbor[r.neighbor];
        if (s.name.empty()) s.name = "j=" + std::to_string(r.neighbor);
        s.points.emplace_back(r.round, r.alpha);
      }
      for (auto& [j, s] : per_neighbor) alpha_series.push_back(std::move(s));
    } else if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
      auto rows = gatta::read_ledger_csv(path);
      std::map<int, long long> per_round;
      for (const auto& r : rows)
        if (r.kind == "global" || r.kind == "head") per_round[r.round] += r.scalars;
      gatta::Series s{name.empty() ? path : name, {}};
      for (const auto& [round, scalars] : per_round)
        s.points.emplace_back(round, static_cast<double>(scalars));
      cost_series.push_back(std::move(s));
    } else {
      std::cerr << "plot: unrecognized input " << path << "\n";
      return 1;
    }
  }
  {
    std::ofstream f(out_dir + "/accuracy.svg");
    f << gatta::render_line_chart("Mean test accuracy", "round", "accuracy", acc_series);
  }
  if (!alpha_series.empty()) {
    std::ofstream f(out_dir + "/alphas.svg");
    f << gatta::render_line_chart("Attention weights of node " + std::to_string(alpha_node),
                                  "round", "alpha", alpha_series);
  }
  if (!cost_series.empty()) {
    std::ofstream f(out_dir + "/cost.svg");
    f << gatta::render_line_chart("Communication cost per round", "round", "scalars",
                                  cost_series);
  }
  std::cout << "charts written to " << out_dir << "\n";
  return 0;
}

int cmd_validate(const std::string& config_path) {
  auto cfg = gatta::load_config(config_path);
  auto graph = gatta::build_topology(cfg.topology);
  gatta::MixingMatrix mixing;
  try {
    mixing = gatta::metropolis_weights(graph, cfg.topology.lazy_metropolis);
  } catch (const std::exception& e) {
    std::cerr << "validate: hard failure: " << e.what() << "\n";
    return 2;
  }
  auto shards = gatta::build_data(cfg.data, graph.n);
  auto layout = gatta::ParamLayout::make(cfg.layers);
  auto report = gatta::validate_setup(cfg, graph, mixing, layout, shards.train);
  std::cout << report.text();
  if (!report.spectral_gap_ok) return 2;
  return 0;
}

int cmd_gen_topology(const std::string& kind, int n, double p, std::uint64_t seed,
                     const std::string& out_path) {
  gatta::Graph g = (kind == "ring") ? gatta::gen_ring(n) : gatta::gen_erdos_renyi(n, p, seed);
  if (out_path.empty()) {
    gatta::save_edge_list(g, std::cout);
  } else {
    gatta::save_edge_list(g, out_path);
    std::cout << "wrote " << g.edge_count() << " edges to " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personalized decentralized learning simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  int trials = 0;
  std::uint64_t seed_base = 1;
  int parallel = 1;

  auto* run = app.add_subcommand("run", "Run one experiment from a config");
  run->add_option("--config", config_path, "Config JSON path")->required();
  run->add_option("--out-dir", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Run algorithm x trial comparison");
  sweep->add_option("--config", config_path, "Config JSON path")->required();
  sweep->add_option("--out-dir", out_dir, "Output directory");
  sweep->add_option("--trials", trials, "Trials per algorithm (default: config)");
  sweep->add_option("--seed-base", seed_base, "Base seed; trial t uses seed-base + t");
  sweep->add_option("--parallel", parallel, "Worker threads for trials");

  std::vector<std::string> report_dirs;
  auto* report = app.add_subcommand("report", "Cost-reduction table over run dirs");
  report->add_option("dirs", report_dirs, "Run directories")->required();

  std::vector<std::string> plot_inputs;
  int alpha_node = 0;
  auto* plot = app.add_subcommand("plot", "Render SVG charts from metric/ledger files");
  plot->add_option("inputs", plot_inputs, "metrics.jsonl / ledger.csv / alphas.csv files");
  plot->add_option("--out-dir", out_dir, "Output directory");
  plot->add_option("--alpha-node", alpha_node, "Node whose attention weights to plot");

  auto* validate = app.add_subcommand("validate", "Theory checks for a config");
  validate->add_option("--config", config_path, "Config JSON path")->required();

  std::string topo_kind = "erdos_renyi", topo_out;
  int topo_n = 16;
  double topo_p = 0.5;
  std::uint64_t topo_seed = 1;
  auto* gen = app.add_subcommand("gen-topology", "Generate a graph edge list");
  gen->add_option("--kind", topo_kind, "erdos_renyi | ring");
  gen->add_option("--n", topo_n, "Agent count")->required();
  gen->add_option("--p", topo_p, "Edge probability (erdos_renyi)");
  gen->add_option("--seed", topo_seed, "Seed (erdos_renyi)");
  gen->add_option("--out", topo_out, "Output path (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir, trials, seed_base, parallel);
    if (report->parsed()) return cmd_report(report_dirs);
    if (plot->parsed()) return cmd_plot(plot_inputs, out_dir, alpha_node);
    if (validate->parsed()) return cmd_validate(config_path);
    if (gen->parsed()) return cmd_gen_topology(topo_kind, topo_n, topo_p, topo_seed, topo_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
