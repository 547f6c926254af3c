#pragma once

// Communication graphs and doubly stochastic gossip matrices.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gatta {

struct Graph {
  int n = 0;
  std::vector<std::uint8_t> adjacency;  // n*n, row-major, symmetric, zero diagonal
  std::vector<int> degrees;

  bool edge(int i, int j) const { return adjacency[static_cast<size_t>(i) * n + j] != 0; }

  std::vector<int> neighbors(int i) const {
    std::vector<int> out;
    for (int j = 0; j < n; ++j)
      if (edge(i, j)) out.push_back(j);
    return out;
  }

  int edge_count() const {
    int total = 0;
    for (int d : degrees) total += d;
    return total / 2;
  }
};

struct MixingMatrix {
  Eigen::MatrixXd weights;
  double rho = 0.0;           // second-largest eigenvalue magnitude
  double spectral_gap = 0.0;  // 1 - rho
};

struct SpectralInfo {
  double rho = 0.0;
  double gap = 0.0;
  std::vector<double> eigenvalue_magnitudes;  // sorted descending
};

namespace detail {

inline bool connected(const Graph& g) {
  if (g.n == 0) return false;
  std::vector<std::uint8_t> seen(g.n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < g.n; ++v) {
      if (g.edge(u, v) && !seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == g.n;
}

inline void recompute_degrees(Graph& g) {
  g.degrees.assign(g.n, 0);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (g.edge(i, j)) ++g.degrees[i];
}

}  // namespace detail

inline void validate_graph(const Graph& g) {
  if (g.n < 2) throw std::invalid_argument("graph: need at least 2 nodes");
  if (g.adjacency.size() != static_cast<size_t>(g.n) * g.n)
    throw std::invalid_argument("graph: adjacency size mismatch");
  for (int i = 0; i < g.n; ++i) {
    if (g.edge(i, i)) throw std::invalid_argument("graph: nonzero diagonal");
    for (int j = 0; j < g.n; ++j)
      if (g.edge(i, j) != g.edge(j, i)) throw std::invalid_argument("graph: asymmetric adjacency");
  }
  if (!detail::connected(g)) throw std::invalid_argument("graph: not connected");
}

// Each unordered pair linked with probability p. Regenerates with incremented
// seed until connected (cap 1000 attempts) so configs stay reproducible.
inline Graph gen_erdos_renyi(int n, double p, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_erdos_renyi: n must be >= 2");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("gen_erdos_renyi: p must be in (0, 1]");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Graph g;
    g.n = n;
    g.adjacency.assign(static_cast<size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (unit(rng) < p) {
          g.adjacency[static_cast<size_t>(i) * n + j] = 1;
          g.adjacency[static_cast<size_t>(j) * n + i] = 1;
        }
    detail::recompute_degrees(g);
    if (detail::connected(g)) return g;
  }
  std::ostringstream msg;
  msg << "gen_erdos_renyi: no connected graph after 1000 attempts (n=" << n << ", p=" << p << ")";
  throw std::runtime_error(msg.str());
}

inline Graph gen_ring(int n) {
  if (n < 3) throw std::invalid_argument("gen_ring: n must be >= 3");
  Graph g;
  g.n = n;
  g.adjacency.assign(static_cast<size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    int next = (i + 1) % n;
    g.adjacency[static_cast<size_t>(i) * n + next] = 1;
    g.adjacency[static_cast<size_t>(next) * n + i] = 1;
  }
  detail::recompute_degrees(g);
  return g;
}

inline SpectralInfo spectral_diagnostics(const Eigen::MatrixXd& weights) {
  const auto n = weights.rows();
  if (n != weights.cols()) throw std::invalid_argument("spectral_diagnostics: not square");
  if ((weights - weights.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("spectral_diagnostics: asymmetric matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(weights);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectral_diagnostics: eigensolver failed");
  SpectralInfo info;
  info.eigenvalue_magnitudes.resize(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    info.eigenvalue_magnitudes[static_cast<size_t>(i)] = std::abs(solver.eigenvalues()[i]);
  std::sort(info.eigenvalue_magnitudes.begin(), info.eigenvalue_magnitudes.end(),
            std::greater<double>());
  if (std::abs(info.eigenvalue_magnitudes[0] - 1.0) > 1e-10)
    throw std::invalid_argument("spectral_diagnostics: leading eigenvalue is not 1");
  info.rho = n > 1 ? info.eigenvalue_magnitudes[1] : 0.0;
  info.gap = 1.0 - info.rho;
  return info;
}

inline SpectralInfo spectral_diagnostics(const MixingMatrix& m) {
  return spectral_diagnostics(m.weights);
}

// Validates double stochasticity, symmetry, nonnegativity and (optionally) the
// sparsity pattern of the graph, then attaches spectral diagnostics.
inline MixingMatrix make_mixing(Eigen::MatrixXd weights, const Graph* g = nullptr) {
  const auto n = weights.rows();
  if (n != weights.cols()) throw std::invalid_argument("make_mixing: not square");
  if ((weights - weights.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("make_mixing: asymmetric weights");
  if (weights.minCoeff() < 0.0) throw std::invalid_argument("make_mixing: negative entry");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(weights.row(i).sum() - 1.0) > 1e-12)
      throw std::invalid_argument("make_mixing: row sums must be 1");
    if (std::abs(weights.col(i).sum() - 1.0) > 1e-12)
      throw std::invalid_argument("make_mixing: column sums must be 1");
  }
  if (g != nullptr) {
    if (g->n != n) throw std::invalid_argument("make_mixing: graph size mismatch");
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && !g->edge(static_cast<int>(i), static_cast<int>(j)) && weights(i, j) != 0.0)
          throw std::invalid_argument("make_mixing: nonzero weight on a non-edge");
  }
  MixingMatrix m;
  m.weights = std::move(weights);
  auto info = spectral_diagnostics(m.weights);
  m.rho = info.rho;
  m.spectral_gap = info.gap;
  if (m.rho >= 1.0 - 1e-10)
    throw std::runtime_error(
        "make_mixing: spectral gap is zero (rho >= 1); for bipartite-like graphs such as even "
        "rings use the lazy Metropolis variant");
  return m;
}

// Metropolis gossip weights. Non-lazy uses 1/max{d_i,d_j} off-diagonal, the
// lazy variant 1/(1+max{d_i,d_j}); lazy keeps the spectral gap positive on
// even rings where the non-lazy rule yields rho = 1.
inline MixingMatrix metropolis_weights(const Graph& g, bool lazy = true) {
  validate_graph(g);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    double off_sum = 0.0;
    for (int j = 0; j < g.n; ++j) {
      if (!g.edge(i, j)) continue;
      double denom = static_cast<double>(std::max(g.degrees[i], g.degrees[j])) + (lazy ? 1.0 : 0.0);
      w(i, j) = 1.0 / denom;
      off_sum += w(i, j);
    }
    w(i, i) = 1.0 - off_sum;
  }
  return make_mixing(std::move(w), &g);
}

// Edge-list text format: one "i j" pair per line, 0-indexed, i < j.
inline void save_edge_list(const Graph& g, std::ostream& out) {
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j)
      if (g.edge(i, j)) out << i << ' ' << j << '\n';
}

inline void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_edge_list: cannot open " + path);
  save_edge_list(g, out);
}

inline Graph load_edge_list(std::istream& in, int n) {
  Graph g;
  g.n = n;
  g.adjacency.assign(static_cast<size_t>(n) * n, 0);
  int i = 0, j = 0;
  while (in >> i >> j) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
      throw std::invalid_argument("load_edge_list: bad edge " + std::to_string(i) + " " +
                                  std::to_string(j));
    g.adjacency[static_cast<size_t>(i) * n + j] = 1;
    g.adjacency[static_cast<size_t>(j) * n + i] = 1;
  }
  detail::recompute_degrees(g);
  validate_graph(g);
  return g;
}

inline Graph load_edge_list(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_edge_list: cannot open " + path);
  return load_edge_list(in, n);
}

}  // namespace gatta
