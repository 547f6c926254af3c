#pragma once

// Executable convergence-analysis quantities: mixing-product norms, the
// horizon constants, learning-rate gates, the bound Phi, and empirical
// constant estimators. Diagnostics only: they warn, they never steer
// training.

#include "gatta/topology.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace gatta {

struct TheoryConstants {
  double L = 1.0;      // smoothness
  double chi = 0.0;    // gradient-noise bound
  double kappa = 0.0;  // non-i.i.d. degree
  int T = 1;           // local SGD steps per round
  double eta = 0.01;   // learning rate
  int K = 1;           // rounds
  double c = 0.1;      // contraction constant, must satisfy c < 1/2 - 8 eta^2 T^2 L^2

  double c_upper() const { return 0.5 - 8.0 * eta * eta * T * T * L * L; }
};

// rho_{s,k-1} = || prod_{l=s}^{k-1} A - Q ||_2. For a constant mixing matrix
// the product is A^{k-s}, so the table only depends on the gap k-s.
struct RhoTable {
  int horizon = 0;                // K
  std::vector<double> by_gap;     // by_gap[m] = ||A^m - Q||_2 for m >= 1; by_gap[0] unused

  double rho_sk(int s, int k) const {  // rho_{s,k-1}
    if (s < 1 || k <= s || k > horizon)
      throw std::invalid_argument("RhoTable: need 1 <= s <= k-1 <= K-1");
    return by_gap[static_cast<size_t>(k - s)];
  }
};

inline double operator_norm_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("operator_norm_sym: eigensolver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

inline RhoTable rho_products(const MixingMatrix& mixing, int K) {
  if (K < 1) throw std::invalid_argument("rho_products: K must be >= 1");
  const auto n = mixing.weights.rows();
  const Eigen::MatrixXd q = Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  RhoTable table;
  table.horizon = K;
  table.by_gap.assign(static_cast<size_t>(K), 0.0);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (int m = 1; m <= K - 1; ++m) {
    power = power * mixing.weights;
    table.by_gap[static_cast<size_t>(m)] = operator_norm_sym(power - q);
  }
  return table;
}

struct AbcConstants {
  double a_k = 0.0;
  double b_k = 0.0;
  double c_k = 0.0;
};

// Direct summation of the horizon constants:
//   A_K = (1/K) sum_k sum_s rho^2,  B_K = (1/K) sum_k (sum_s rho)^2,
//   C_K = max_s sum_{k>s} rho_{s,k-1} (sum_l rho_{l,k-1}).
inline AbcConstants abc_constants(const RhoTable& table, int K) {
  if (K > table.horizon) throw std::invalid_argument("abc_constants: table horizon too short");
  AbcConstants out;
  for (int k = 1; k <= K; ++k) {
    double sq = 0.0, lin = 0.0;
    for (int s = 1; s <= k - 1; ++s) {
      const double r = table.rho_sk(s, k);
      sq += r * r;
      lin += r;
    }
    out.a_k += sq;
    out.b_k += lin * lin;
  }
  out.a_k /= K;
  out.b_k /= K;
  for (int s = 1; s <= K - 1; ++s) {
    double acc = 0.0;
    for (int k = s + 1; k <= K; ++k) {
      double inner = 0.0;
      for (int l = 1; l <= k - 1; ++l) inner += table.rho_sk(l, k);
      acc += table.rho_sk(s, k) * inner;
    }
    out.c_k = std::max(out.c_k, acc);
  }
  return out;
}

// eta < min{ 1/(24TL), 1/(32TL sqrt(C_K)) }
inline double lr_gate(double L, int T, double c_k) {
  if (!(L > 0.0) || T < 1) throw std::invalid_argument("lr_gate: need L > 0 and T >= 1");
  const double first = 1.0 / (24.0 * T * L);
  if (c_k <= 0.0) return first;
  return std::min(first, 1.0 / (32.0 * T * L * std::sqrt(c_k)));
}

// The three-term bound
//   Phi = (1/c) { eta L (1 + 4 eta T L) chi^2
//               + (1/N)[ eta L (4 kappa^2 T + chi^2) + 6 T eta^2 chi^2 L^2 ]
//               + 64 eta^2 T L^2 (A_K chi^2 + B_K T (kappa^2 + T eta^2 chi^2 L^2)) }
inline double phi_bound(const TheoryConstants& tc, double a_k, double b_k, int n_agents) {
  if (n_agents < 1) throw std::invalid_argument("phi_bound: need at least one agent");
  const double upper = tc.c_upper();
  if (!(tc.c > 0.0 && tc.c < upper))
    throw std::invalid_argument(
        "phi_bound: constant c must satisfy 0 < c < 1/2 - 8 eta^2 T^2 L^2 (upper bound " +
        std::to_string(upper) + ")");
  const double eta = tc.eta, L = tc.L, chi2 = tc.chi * tc.chi, kappa2 = tc.kappa * tc.kappa;
  const double T = static_cast<double>(tc.T);
  const double term1 = eta * L * (1.0 + 4.0 * eta * T * L) * chi2;
  const double term2 =
      (eta * L * (4.0 * kappa2 * T + chi2) + 6.0 * T * eta * eta * chi2 * L * L) / n_agents;
  const double term3 = 64.0 * eta * eta * T * L * L *
                       (a_k * chi2 + b_k * T * (kappa2 + T * eta * eta * chi2 * L * L));
  return (term1 + term2 + term3) / tc.c;
}

// Right-hand side of the convergence inequality: (F_0 - F_*)/(c T K eta) + Phi.
inline double convergence_rhs(const TheoryConstants& tc, double a_k, double b_k, int n_agents,
                              double f0, double f_star) {
  return (f0 - f_star) / (tc.c * tc.T * tc.K * tc.eta) + phi_bound(tc, a_k, b_k, n_agents);
}

// --- empirical constant estimators (heuristic lower bounds) ---

// max secant ratio ||g(p) - g(q)|| / ||p - q|| over consecutive point pairs
inline double estimate_smoothness(
    const std::function<std::vector<double>(const std::vector<double>&)>& grad_fn,
    const std::vector<std::vector<double>>& points) {
  double best = 0.0;
  for (size_t i = 0; i + 1 < points.size(); ++i) {
    auto g1 = grad_fn(points[i]);
    auto g2 = grad_fn(points[i + 1]);
    double num = 0.0, den = 0.0;
    for (size_t k = 0; k < g1.size(); ++k) {
      const double dg = g1[k] - g2[k];
      const double dp = points[i][k] - points[i + 1][k];
      num += dg * dg;
      den += dp * dp;
    }
    if (den > 0.0) best = std::max(best, std::sqrt(num / den));
  }
  return best;
}

// max over probes of || g_minibatch - g_full ||_2 at the given points
inline double estimate_gradient_noise(
    const std::function<std::vector<double>(const std::vector<double>&)>& full_grad_fn,
    const std::function<std::vector<double>(const std::vector<double>&, std::mt19937_64&)>&
        minibatch_grad_fn,
    const std::vector<std::vector<double>>& points, int probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (const auto& p : points) {
    auto full = full_grad_fn(p);
    for (int t = 0; t < probes; ++t) {
      auto mb = minibatch_grad_fn(p, rng);
      double acc = 0.0;
      for (size_t k = 0; k < full.size(); ++k) {
        const double d = mb[k] - full[k];
        acc += d * d;
      }
      best = std::max(best, std::sqrt(acc));
    }
  }
  return best;
}

// max over points of (1/N) sum_i || g_i - mean_j g_j ||_2, per-agent gradients
// taken at a common evaluation point
inline double estimate_noniid_degree(
    const std::vector<std::function<std::vector<double>(const std::vector<double>&)>>& agent_grads,
    const std::vector<std::vector<double>>& points) {
  if (agent_grads.empty()) throw std::invalid_argument("estimate_noniid_degree: no agents");
  double best = 0.0;
  for (const auto& p : points) {
    std::vector<std::vector<double>> grads;
    grads.reserve(agent_grads.size());
    for (const auto& fn : agent_grads) grads.push_back(fn(p));
    std::vector<double> mean(grads[0].size(), 0.0);
    for (const auto& g : grads)
      for (size_t k = 0; k < mean.size(); ++k) mean[k] += g[k] / grads.size();
    double acc = 0.0;
    for (const auto& g : grads) {
      double d2 = 0.0;
      for (size_t k = 0; k < mean.size(); ++k) {
        const double d = g[k] - mean[k];
        d2 += d * d;
      }
      acc += std::sqrt(d2);
    }
    best = std::max(best, acc / grads.size());
  }
  return best;
}

struct RateReport {
  double slope = 0.0;
  int points = 0;
};

// Least-squares slope of log(min-gradient-norm-so-far) against log(round).
// Advisory only.
inline RateReport check_rate(const std::vector<double>& grad_norms) {
  RateReport report;
  double running_min = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> pts;
  for (size_t k = 0; k < grad_norms.size(); ++k) {
    running_min = std::min(running_min, grad_norms[k]);
    if (running_min > 0.0)
      pts.emplace_back(std::log(static_cast<double>(k + 1)), std::log(running_min));
  }
  report.points = static_cast<int>(pts.size());
  if (pts.size() < 2) return report;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double denom = n * sxx - sx * sx;
  if (denom != 0.0) report.slope = (n * sxy - sx * sy) / denom;
  return report;
}

}  // namespace gatta
