#include "gatta/runner.hpp"
#include "gatta/svg.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gatta;
using nlohmann::json;

namespace {

json tiny_config(const std::string& algorithm) {
  json j = {
      {"topology", {{"kind", "erdos_renyi"}, {"n", 4}, {"p", 0.9}, {"seed", 3}}},
      {"data",
       {{"regime", "label_skew"},
        {"classes", 3},
        {"dim", 4},
        {"per_class", 30},
        {"sep", 3.0},
        {"labels_per_agent", 2},
        {"test_frac", 0.25},
        {"seed", 5}}},
      {"model", {{"layers", {4, 6, 3}}}},
      {"algorithm", algorithm},
      {"hyper", {{"eta", 0.05}, {"mu", 0.9}, {"batch", 8}, {"rounds", 3}}},
      {"seed", 9}};
  if (algorithm == "ce_gatta") j["hyper"]["tau_rule"] = "quarter_deg";
  return j;
}

std::string metrics_string(const RunOutput& run) {
  std::ostringstream out;
  write_metrics_jsonl(run.metrics, out);
  return out.str();
}

}  // namespace

TEST_CASE("config parses a full document") {
  auto cfg = parse_config(tiny_config("gatta"));
  REQUIRE(cfg.topology.n == 4);
  REQUIRE(cfg.data.labels_per_agent == 2);
  REQUIRE(cfg.algorithm == Algorithm::gatta);
  REQUIRE(cfg.hyper.rounds == 3);
  REQUIRE(cfg.hyper.steps_per_epoch == 0);
  REQUIRE(cfg.seed == 9);
}

TEST_CASE("config errors carry the field name") {
  auto j = tiny_config("gatta");
  j.erase("seed");
  REQUIRE_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("seed"));

  j = tiny_config("gatta");
  j["hyper"]["eta"] = -1.0;
  REQUIRE_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("hyper.eta"));

  j = tiny_config("gatta");
  j["hyper"]["mu"] = 1.5;
  REQUIRE_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("hyper.mu"));

  j = tiny_config("gatta");
  j["topology"]["p"] = 0.0;
  REQUIRE_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("topology.p"));

  j = tiny_config("gatta");
  j["algorithm"] = "sgd";
  REQUIRE_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("algorithm"));
}

TEST_CASE("tau fields are rejected outside ce_gatta") {
  auto j = tiny_config("gatta");
  j["hyper"]["tau_rule"] = "quarter_deg";
  REQUIRE_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("ce_gatta"));
  // but allowed when the sweep list includes ce_gatta
  j["algorithms"] = {"gatta", "ce_gatta"};
  REQUIRE_NOTHROW(parse_config(j));
}

TEST_CASE("config hash is canonical over key order") {
  json a = {{"b", 1}, {"a", {{"y", 2}, {"x", 3}}}};
  json b = {{"a", {{"x", 3}, {"y", 2}}}, {"b", 1}};
  REQUIRE(config_hash(a) == config_hash(b));
  json c = a;
  c["b"] = 2;
  REQUIRE(config_hash(a) != config_hash(c));
}

TEST_CASE("taus follow the configured rule") {
  auto cfg = parse_config(tiny_config("ce_gatta"));
  Graph g = gen_ring(4);
  auto taus = cfg.taus_for(g);
  for (double t : taus) REQUIRE(t == Catch::Approx(1.0 / 8.0));
  cfg.hyper.tau_rule = "inv_deg";
  REQUIRE(cfg.taus_for(g)[0] == Catch::Approx(0.5));
  cfg.hyper.tau_rule = "fixed";
  cfg.hyper.tau_value = 0.07;
  REQUIRE(cfg.taus_for(g)[2] == 0.07);
}

TEST_CASE("run_experiment emits one metric row per agent per round") {
  auto cfg = parse_config(tiny_config("gatta"));
  auto run = run_experiment(cfg);
  REQUIRE(run.metrics.size() == 4u * 3u);
  REQUIRE(last_round(run) == 3);
  REQUIRE(!run.alphas.empty());
  REQUIRE(run.final_mean_acc >= 0.0);
  // round-0 bootstrap plus per-round head+global traffic
  auto expected = expected_cost_per_round(Algorithm::gatta, run.graph, run.layout);
  for (int r = 1; r <= 3; ++r) {
    auto counts = run.ledger.round_counts(r);
    REQUIRE(counts.global_scalars == expected.global_scalars);
    REQUIRE(counts.head_scalars == expected.head_scalars);
  }
}

TEST_CASE("feature-skew configs run end to end") {
  json j = tiny_config("gatta");
  j["data"] = {{"regime", "feature_skew"}, {"classes", 3}, {"dim", 4},   {"per_class", 40},
               {"sep", 3.0},               {"writers", 8}, {"writers_per_agent", 2},
               {"test_frac", 0.25},        {"seed", 6}};
  auto run = run_experiment(parse_config(j));
  REQUIRE(run.metrics.size() == 4u * 3u);
  REQUIRE(run.final_mean_acc > 0.0);
}

TEST_CASE("idx configs run end to end") {
  const auto img = (std::filesystem::temp_directory_path() / "gatta_run_idx_img").string();
  const auto lab = (std::filesystem::temp_directory_path() / "gatta_run_idx_lab").string();
  {
    std::ofstream io(img, std::ios::binary);
    std::ofstream lo(lab, std::ios::binary);
    auto be32 = [](std::ostream& o, std::uint32_t v) {
      unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
      o.write(reinterpret_cast<const char*>(b), 4);
    };
    const int n = 60;
    be32(io, 0x803);
    be32(io, n);
    be32(io, 2);
    be32(io, 2);
    be32(lo, 0x801);
    be32(lo, n);
    std::mt19937_64 rng(3);
    for (int i = 0; i < n; ++i) {
      const char label = static_cast<char>(i % 3);
      for (int k = 0; k < 4; ++k) {
        const unsigned char px =
            static_cast<unsigned char>((label * 80 + 40 + static_cast<int>(rng() % 40)) & 0xff);
        io.write(reinterpret_cast<const char*>(&px), 1);
      }
      lo.write(&label, 1);
    }
  }
  json j = tiny_config("dsgd");
  j["data"] = {{"regime", "idx"},     {"images_path", img}, {"labels_path", lab},
               {"labels_per_agent", 2}, {"test_frac", 0.25}, {"seed", 4}};
  j["model"]["layers"] = {4, 6, 3};
  auto run = run_experiment(parse_config(j));
  REQUIRE(run.metrics.size() == 4u * 3u);
}

TEST_CASE("independent learning writes an all-zero ledger") {
  auto cfg = parse_config(tiny_config("il"));
  auto run = run_experiment(cfg);
  REQUIRE(run.ledger.cumulative.parameter_total() == 0);
  for (const auto& m : run.metrics) {
    REQUIRE(m.comm_global == 0);
    REQUIRE(m.comm_head == 0);
  }
}

TEST_CASE("model layer mismatches are rejected with config diagnostics") {
  auto j = tiny_config("gatta");
  j["model"]["layers"] = {5, 6, 3};  // data dim is 4
  REQUIRE_THROWS_WITH(run_experiment(parse_config(j)),
                      Catch::Matchers::ContainsSubstring("model.layers"));
  j["model"]["layers"] = {4, 6, 2};  // class count is 3
  REQUIRE_THROWS_WITH(run_experiment(parse_config(j)),
                      Catch::Matchers::ContainsSubstring("class count"));
}

TEST_CASE("repeated runs are byte-identical") {
  auto cfg = parse_config(tiny_config("ce_gatta"));
  auto a = run_experiment(cfg);
  auto b = run_experiment(cfg);
  REQUIRE(metrics_string(a) == metrics_string(b));
  std::ostringstream la, lb;
  a.ledger.to_csv(la);
  b.ledger.to_csv(lb);
  REQUIRE(la.str() == lb.str());
}

TEST_CASE("run files land in the output directory") {
  auto cfg = parse_config(tiny_config("gatta"));
  auto run = run_experiment(cfg);
  const auto dir = (std::filesystem::temp_directory_path() / "gatta_run_test").string();
  std::filesystem::remove_all(dir);
  write_run_files(run, dir);
  for (const char* name :
       {"metrics.jsonl", "ledger.csv", "alphas.csv", "meta.json", "topology.edges"})
    REQUIRE(std::filesystem::exists(dir + "/" + name));
  // metadata echoes the full config and the layout counts
  std::ifstream meta_in(dir + "/meta.json");
  json meta;
  meta_in >> meta;
  REQUIRE(meta.at("config") == cfg.raw);
  REQUIRE(meta.at("layout").at("n_v").get<int>() == run.layout.total);
  REQUIRE(meta.at("validation").contains("rho"));
  // and the readers round-trip the streams
  auto rows = read_metrics_jsonl(dir + "/metrics.jsonl");
  REQUIRE(rows.size() == run.metrics.size());
  REQUIRE(rows.back().test_acc == run.metrics.back().test_acc);
  auto alphas = read_alphas_csv(dir + "/alphas.csv");
  REQUIRE(alphas.size() == run.alphas.size());
  auto ledger_rows = read_ledger_csv(dir + "/ledger.csv");
  REQUIRE(!ledger_rows.empty());
}

TEST_CASE("confidence half-width shrinks with trial count at stable spread") {
  // replicating the trial multiset keeps the sd estimate put while the
  // 1/sqrt(n) factor drops
  std::vector<SweepRun> two{{Algorithm::gatta, 0, 0.80, ""}, {Algorithm::gatta, 1, 0.84, ""}};
  std::vector<SweepRun> four = two;
  four.push_back({Algorithm::gatta, 2, 0.80, ""});
  four.push_back({Algorithm::gatta, 3, 0.84, ""});
  const double hw2 = summarize_sweep(two)[0].half_width;
  const double hw4 = summarize_sweep(four)[0].half_width;
  REQUIRE(hw4 < hw2);
  REQUIRE(hw2 == Catch::Approx(1.96 * 0.02 * std::sqrt(2.0) / std::sqrt(2.0)));
}

TEST_CASE("run meta reports the advisory rate fit") {
  auto cfg = parse_config(tiny_config("gatta"));
  auto run = run_experiment(cfg);
  REQUIRE(run.mean_grad_norms.size() == 3);
  auto meta = run_meta_json(run);
  REQUIRE(meta.at("rate_fit").contains("slope"));
  REQUIRE(meta.at("rate_fit").at("points").get<int>() <= 3);
}

TEST_CASE("sweep summary: identical accuracies give zero width, single trial gives n/a") {
  std::vector<SweepRun> runs{{Algorithm::gatta, 0, 0.8, ""}, {Algorithm::gatta, 1, 0.8, ""}};
  auto rows = summarize_sweep(runs);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].mean_acc == Catch::Approx(0.8));
  REQUIRE(rows[0].half_width == Catch::Approx(0.0).margin(1e-15));

  std::vector<SweepRun> single{{Algorithm::il, 0, 0.5, ""}};
  auto one = summarize_sweep(single);
  REQUIRE(one[0].half_width < 0.0);
}

TEST_CASE("sweep runs both algorithms for each trial seed") {
  auto j = tiny_config("ce_gatta");
  j["algorithms"] = {"il", "ce_gatta"};
  auto cfg = parse_config(j);
  const auto dir = (std::filesystem::temp_directory_path() / "gatta_sweep_test").string();
  std::filesystem::remove_all(dir);
  auto runs = run_sweep(cfg, 2, 100, 2, dir);
  REQUIRE(runs.size() == 4);
  auto rows = summarize_sweep(runs);
  REQUIRE(rows.size() == 2);
  for (const auto& r : runs) REQUIRE(std::filesystem::exists(r.dir + "/metrics.jsonl"));
}

TEST_CASE("validation report: lazy ring passes, gap and bounds populated") {
  json j = tiny_config("gatta");
  j["topology"] = {{"kind", "ring"}, {"n", 4}};
  auto cfg = parse_config(j);
  auto graph = build_topology(cfg.topology);
  auto mixing = metropolis_weights(graph, true);
  auto shards = build_data(cfg.data, graph.n);
  auto layout = ParamLayout::make(cfg.layers);
  auto report = validate_setup(cfg, graph, mixing, layout, shards.train);
  REQUIRE(report.spectral_gap_ok);
  REQUIRE(report.rho == Catch::Approx(1.0 / 3.0));
  REQUIRE(report.mu_bounds.size() == 4);
  REQUIRE(report.l_estimate > 0.0);
  REQUIRE(report.lr_gate_value > 0.0);
  REQUIRE_THAT(report.text(), Catch::Matchers::ContainsSubstring("spectral gap check"));
}

TEST_CASE("non-lazy even ring is a hard validation failure") {
  auto graph = gen_ring(4);
  REQUIRE_THROWS_AS(metropolis_weights(graph, false), std::runtime_error);
}

TEST_CASE("fine-tuning after consensus helps at least half the agents") {
  json j = tiny_config("dsgd");
  j["topology"]["n"] = 6;
  j["data"]["classes"] = 4;
  j["data"]["per_class"] = 100;
  j["model"]["layers"] = {4, 8, 4};
  j["hyper"]["rounds"] = 10;
  auto dsgd_run = run_experiment(parse_config(j));
  j["algorithm"] = "dsgd_ft";
  j["hyper"]["ft_epochs"] = 5;
  auto ft_run = run_experiment(parse_config(j));
  auto final_per_agent = [](const RunOutput& run) {
    const int last = last_round(run);
    std::vector<double> acc;
    for (const auto& m : run.metrics)
      if (m.round == last) acc.push_back(m.test_acc);
    return acc;
  };
  auto base = final_per_agent(dsgd_run);
  auto tuned = final_per_agent(ft_run);
  int improved = 0;
  for (size_t i = 0; i < base.size(); ++i)
    if (tuned[i] >= base[i]) ++improved;
  REQUIRE(improved * 2 >= static_cast<int>(base.size()));
}

TEST_CASE("cost helpers walk the metric stream") {
  auto cfg = parse_config(tiny_config("gatta"));
  auto run = run_experiment(cfg);
  const double final_acc = mean_test_acc_at_round(run, last_round(run));
  REQUIRE(rounds_to_accuracy(run, final_acc) >= 1);
  REQUIRE(rounds_to_accuracy(run, 1.1) == -1);
  REQUIRE(cost_to_accuracy(run, 0.0) >= 0);
  REQUIRE(cost_to_accuracy(run, 1.1) == run.ledger.cumulative.parameter_total());
}

TEST_CASE("constant estimates: identical shards and full batches degenerate") {
  auto layout = ParamLayout::make({3, 5, 2});
  Dataset shard;
  shard.dim = 3;
  shard.num_classes = 2;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 12; ++i) {
    std::vector<double> x{gauss(rng), gauss(rng), gauss(rng)};
    shard.append(x, i % 2);
  }
  std::vector<Dataset> shards{shard, shard, shard};
  std::vector<std::vector<double>> points{init_params(layout, 1), init_params(layout, 2)};
  // full-batch "minibatches": chi must vanish
  auto est = estimate_constants(layout, shards, points, shard.size() * 4, 3, 9);
  REQUIRE(est.chi == 0.0);
  REQUIRE(est.kappa == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(est.l > 0.0);

  // heterogeneous shards with genuinely small minibatches: both spreads show
  std::vector<Dataset> mixed;
  for (int a = 0; a < 3; ++a) {
    Dataset d;
    d.dim = 3;
    d.num_classes = 2;
    for (int i = 0; i < 12; ++i) {
      std::vector<double> x{gauss(rng) + a, gauss(rng), gauss(rng)};
      d.append(x, i % 2);
    }
    mixed.push_back(d);
  }
  auto het = estimate_constants(layout, mixed, points, 2, 3, 9);
  REQUIRE(het.kappa > 0.0);
  REQUIRE(het.chi > 0.0);
}

TEST_CASE("line chart golden file") {
  std::vector<Series> series{{"demo", {{0.0, 0.0}, {1.0, 0.5}, {2.0, 0.25}}}};
  const std::string svg = render_line_chart("Demo", "x", "y", series);
  std::ifstream golden(std::string(GATTA_TEST_DIR) + "/golden/line_chart.svg");
  REQUIRE(golden.good());
  std::stringstream want;
  want << golden.rdbuf();
  REQUIRE(svg == want.str());
}

TEST_CASE("empty chart input still renders axes") {
  const std::string svg = render_line_chart("Empty", "x", "y", {});
  REQUIRE_THAT(svg, Catch::Matchers::ContainsSubstring("<svg"));
  REQUIRE_THAT(svg, Catch::Matchers::ContainsSubstring("</svg>"));
  REQUIRE_THAT(svg, !Catch::Matchers::ContainsSubstring("polyline"));
}

TEST_CASE("single series renders one polyline") {
  std::vector<Series> series{{"s", {{0.0, 1.0}, {1.0, 2.0}}}};
  const std::string svg = render_line_chart("One", "x", "y", series);
  size_t count = 0, pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++count;
    ++pos;
  }
  REQUIRE(count == 1);
}
