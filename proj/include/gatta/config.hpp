#pragma once

// Experiment configuration: canonical JSON in, validated spec out, with
// field-level diagnostics. The full canonical config is echoed into run
// metadata for provenance.

#include "gatta/netsim.hpp"
#include "gatta/topology.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gatta {

struct TopologySpec {
  std::string kind = "erdos_renyi";  // erdos_renyi | ring
  int n = 0;
  double p = 0.5;
  std::uint64_t seed = 0;
  bool lazy_metropolis = true;
};

struct DataSpec {
  std::string regime = "label_skew";  // label_skew | feature_skew | idx
  int classes = 6;
  int dim = 20;
  int per_class = 500;
  double sep = 3.0;
  int labels_per_agent = 2;
  int writers = 0;
  int writers_per_agent = 0;
  double test_frac = 0.25;
  std::uint64_t seed = 0;
  std::string images_path;
  std::string labels_path;
};

struct HyperSpec {
  double eta = 0.01;
  double mu = 0.9;
  int batch = 32;
  int steps_per_epoch = 0;  // 0: derive ceil(n_i / batch)
  std::string tau_rule;     // quarter_deg | inv_deg | fixed (CE-GATTA only)
  double tau_value = 0.0;
  int rounds = 100;
  int ft_epochs = 5;  // DSGD-FT fine-tune epochs
};

struct ExperimentConfig {
  TopologySpec topology;
  DataSpec data;
  std::vector<int> layers;
  Algorithm algorithm = Algorithm::gatta;
  HyperSpec hyper;
  std::uint64_t seed = 1;
  std::vector<Algorithm> sweep_algorithms;  // used by the sweep command
  int trials = 1;
  nlohmann::json raw;  // canonical echo

  std::vector<double> taus_for(const Graph& g) const {
    std::vector<double> taus(static_cast<size_t>(g.n), 0.0);
    for (int i = 0; i < g.n; ++i) {
      const double d = static_cast<double>(g.degrees[static_cast<size_t>(i)]);
      if (hyper.tau_rule == "quarter_deg") taus[static_cast<size_t>(i)] = 1.0 / (4.0 * d);
      else if (hyper.tau_rule == "inv_deg") taus[static_cast<size_t>(i)] = 1.0 / d;
      else if (hyper.tau_rule == "fixed") taus[static_cast<size_t>(i)] = hyper.tau_value;
      else throw std::invalid_argument("config: hyper.tau_rule: unknown rule '" + hyper.tau_rule + "'");
    }
    return taus;
  }
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& field, const std::string& msg) {
  throw std::invalid_argument("config: " + field + ": " + msg);
}

template <typename T>
T require(const nlohmann::json& j, const std::string& section, const std::string& key) {
  if (!j.contains(key)) config_error(section + "." + key, "missing required field");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(section + "." + key, "wrong type");
  }
}

template <typename T>
T optional(const nlohmann::json& j, const std::string& section, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(section + "." + key, "wrong type");
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::config_error;
  ExperimentConfig cfg;
  cfg.raw = j;

  if (!j.contains("topology")) config_error("topology", "missing section");
  const auto& t = j.at("topology");
  cfg.topology.kind = detail::require<std::string>(t, "topology", "kind");
  cfg.topology.n = detail::require<int>(t, "topology", "n");
  if (cfg.topology.n < 2) config_error("topology.n", "need at least 2 agents");
  if (cfg.topology.kind == "erdos_renyi") {
    cfg.topology.p = detail::require<double>(t, "topology", "p");
    if (!(cfg.topology.p > 0.0 && cfg.topology.p <= 1.0))
      config_error("topology.p", "must be in (0, 1]");
    cfg.topology.seed = detail::require<std::uint64_t>(t, "topology", "seed");
  } else if (cfg.topology.kind == "ring") {
    if (cfg.topology.n < 3) config_error("topology.n", "ring needs n >= 3");
  } else {
    config_error("topology.kind", "unknown kind '" + cfg.topology.kind + "'");
  }
  cfg.topology.lazy_metropolis = detail::optional<bool>(t, "topology", "lazy_metropolis", true);

  if (!j.contains("data")) config_error("data", "missing section");
  const auto& d = j.at("data");
  cfg.data.regime = detail::require<std::string>(d, "data", "regime");
  cfg.data.test_frac = detail::optional<double>(d, "data", "test_frac", 0.25);
  if (!(cfg.data.test_frac >= 0.0 && cfg.data.test_frac < 1.0))
    config_error("data.test_frac", "must be in [0, 1)");
  if (cfg.data.regime == "label_skew" || cfg.data.regime == "feature_skew") {
    cfg.data.classes = detail::require<int>(d, "data", "classes");
    cfg.data.dim = detail::require<int>(d, "data", "dim");
    cfg.data.per_class = detail::require<int>(d, "data", "per_class");
    cfg.data.sep = detail::require<double>(d, "data", "sep");
    cfg.data.seed = detail::require<std::uint64_t>(d, "data", "seed");
    if (cfg.data.regime == "label_skew") {
      cfg.data.labels_per_agent = detail::require<int>(d, "data", "labels_per_agent");
      if (cfg.data.labels_per_agent < 1 || cfg.data.labels_per_agent > cfg.data.classes)
        config_error("data.labels_per_agent", "must be in [1, classes]");
    } else {
      cfg.data.writers = detail::require<int>(d, "data", "writers");
      cfg.data.writers_per_agent = detail::require<int>(d, "data", "writers_per_agent");
      if (cfg.data.writers_per_agent < 1 || cfg.data.writers_per_agent > cfg.data.writers)
        config_error("data.writers_per_agent", "must be in [1, writers]");
    }
  } else if (cfg.data.regime == "idx") {
    cfg.data.images_path = detail::require<std::string>(d, "data", "images_path");
    cfg.data.labels_path = detail::require<std::string>(d, "data", "labels_path");
    cfg.data.labels_per_agent = detail::optional<int>(d, "data", "labels_per_agent", 0);
    cfg.data.seed = detail::require<std::uint64_t>(d, "data", "seed");
  } else {
    config_error("data.regime", "unknown regime '" + cfg.data.regime + "'");
  }

  if (!j.contains("model")) config_error("model", "missing section");
  cfg.layers = detail::require<std::vector<int>>(j.at("model"), "model", "layers");
  if (cfg.layers.size() < 2) config_error("model.layers", "need at least input and output sizes");

  try {
    cfg.algorithm = algorithm_from_string(detail::require<std::string>(j, "", "algorithm"));
  } catch (const std::invalid_argument& e) {
    config_error("algorithm", e.what());
  }
  if (j.contains("algorithms")) {
    for (const auto& name : j.at("algorithms")) {
      try {
        cfg.sweep_algorithms.push_back(algorithm_from_string(name.get<std::string>()));
      } catch (const std::invalid_argument& e) {
        config_error("algorithms", e.what());
      }
    }
  }

  if (!j.contains("hyper")) config_error("hyper", "missing section");
  const auto& h = j.at("hyper");
  cfg.hyper.eta = detail::require<double>(h, "hyper", "eta");
  if (!(cfg.hyper.eta > 0.0)) config_error("hyper.eta", "must be positive");
  cfg.hyper.mu = detail::optional<double>(h, "hyper", "mu", 0.9);
  if (!(cfg.hyper.mu >= 0.0 && cfg.hyper.mu <= 1.0)) config_error("hyper.mu", "must be in [0, 1]");
  cfg.hyper.batch = detail::optional<int>(h, "hyper", "batch", 32);
  if (cfg.hyper.batch < 1) config_error("hyper.batch", "must be positive");
  cfg.hyper.steps_per_epoch = detail::optional<int>(h, "hyper", "steps_per_epoch", 0);
  if (cfg.hyper.steps_per_epoch < 0) config_error("hyper.steps_per_epoch", "must be nonnegative");
  cfg.hyper.rounds = detail::require<int>(h, "hyper", "rounds");
  if (cfg.hyper.rounds < 0) config_error("hyper.rounds", "must be nonnegative");
  cfg.hyper.ft_epochs = detail::optional<int>(h, "hyper", "ft_epochs", 5);
  if (cfg.hyper.ft_epochs < 0) config_error("hyper.ft_epochs", "must be nonnegative");

  const bool ce_involved =
      cfg.algorithm == Algorithm::ce_gatta ||
      std::find(cfg.sweep_algorithms.begin(), cfg.sweep_algorithms.end(),
                Algorithm::ce_gatta) != cfg.sweep_algorithms.end();
  const bool has_tau = h.contains("tau_rule") || h.contains("tau_value");
  if (has_tau && !ce_involved)
    config_error("hyper.tau_rule", "threshold fields belong to ce_gatta only");
  if (ce_involved) {
    cfg.hyper.tau_rule = detail::optional<std::string>(h, "hyper", "tau_rule", "quarter_deg");
    cfg.hyper.tau_value = detail::optional<double>(h, "hyper", "tau_value", 0.0);
    if (cfg.hyper.tau_rule == "fixed" && !(cfg.hyper.tau_value >= 0.0))
      config_error("hyper.tau_value", "must be nonnegative");
    if (cfg.hyper.tau_rule != "quarter_deg" && cfg.hyper.tau_rule != "inv_deg" &&
        cfg.hyper.tau_rule != "fixed")
      config_error("hyper.tau_rule", "must be quarter_deg, inv_deg or fixed");
  }

  cfg.seed = detail::require<std::uint64_t>(j, "", "seed");
  cfg.trials = detail::optional<int>(j, "", "trials", 1);
  if (cfg.trials < 1) config_error("trials", "must be positive");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: " + path + ": not valid JSON: " + e.what());
  }
  return parse_config(j);
}

// FNV-1a over the canonical (key-sorted) dump.
inline std::uint64_t config_hash(const nlohmann::json& canonical) {
  const std::string s = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace gatta
