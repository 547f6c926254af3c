#pragma once

// Per-agent train/test shards under label-distribution and feature-distribution skew.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gatta {

struct Dataset {
  int dim = 0;
  int num_classes = 0;
  std::vector<double> features;  // size() x dim, row-major
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
  std::span<const double> row(int i) const {
    return {features.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
  }
  void append(std::span<const double> x, int y) {
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(y);
  }
};

inline void validate_dataset(const Dataset& d) {
  if (d.size() < 1) throw std::invalid_argument("dataset: empty");
  if (d.features.size() != static_cast<size_t>(d.size()) * d.dim)
    throw std::invalid_argument("dataset: feature/label count mismatch");
  for (double v : d.features)
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite feature");
  for (int y : d.labels)
    if (y < 0 || y >= d.num_classes) throw std::invalid_argument("dataset: label out of range");
}

struct ShardAssignment {
  std::vector<Dataset> train;
  std::vector<Dataset> test;
  std::vector<std::vector<int>> agent_labels;   // label skew: assigned label set per agent
  std::vector<std::vector<int>> agent_writers;  // feature skew: writer ids per agent
};

// Class means drawn on a sphere of radius sep, unit-variance isotropic noise,
// balanced classes, ordered by class (partitioners shuffle).
inline Dataset gen_gaussian_mixture(int num_classes, int dim, int per_class, double sep,
                                    std::uint64_t seed) {
  if (num_classes < 2) throw std::invalid_argument("gen_gaussian_mixture: need >= 2 classes");
  if (dim < 2) throw std::invalid_argument("gen_gaussian_mixture: need dim >= 2");
  if (per_class < 1) throw std::invalid_argument("gen_gaussian_mixture: need per_class >= 1");
  if (!(sep > 0.0)) throw std::invalid_argument("gen_gaussian_mixture: sep must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> means(num_classes, std::vector<double>(dim));
  for (auto& m : means) {
    double norm2 = 0.0;
    for (double& v : m) {
      v = gauss(rng);
      norm2 += v * v;
    }
    double scale = sep / std::sqrt(std::max(norm2, 1e-300));
    for (double& v : m) v *= scale;
  }
  Dataset out;
  out.dim = dim;
  out.num_classes = num_classes;
  out.features.reserve(static_cast<size_t>(num_classes) * per_class * dim);
  out.labels.reserve(static_cast<size_t>(num_classes) * per_class);
  for (int c = 0; c < num_classes; ++c)
    for (int s = 0; s < per_class; ++s) {
      for (int k = 0; k < dim; ++k) out.features.push_back(means[c][k] + gauss(rng));
      out.labels.push_back(c);
    }
  return out;
}

// Each agent draws c_i distinct labels uniformly; resampled until every label
// has at least one holder. Samples of each label are split evenly among its
// holders (remainder round-robin by agent index); each holder chunk then
// yields test_frac held-out test samples. Every source sample lands in exactly
// one agent's train or test shard.
inline ShardAssignment partition_label_skew(const Dataset& data, int n_agents, int labels_per_agent,
                                            double test_frac, std::uint64_t seed) {
  validate_dataset(data);
  const int C = data.num_classes;
  if (n_agents < 1) throw std::invalid_argument("partition_label_skew: need >= 1 agent");
  if (labels_per_agent < 1 || labels_per_agent > C)
    throw std::invalid_argument("partition_label_skew: labels_per_agent must be in [1, C]");
  if (!(test_frac >= 0.0 && test_frac < 1.0))
    throw std::invalid_argument("partition_label_skew: test_frac must be in [0, 1)");
  std::mt19937_64 rng(seed);

  std::vector<std::vector<int>> agent_labels(n_agents);
  std::vector<int> all_labels(C);
  std::iota(all_labels.begin(), all_labels.end(), 0);
  bool covered = false;
  for (int attempt = 0; attempt < 1000 && !covered; ++attempt) {
    std::vector<std::uint8_t> seen(C, 0);
    for (auto& set : agent_labels) {
      std::vector<int> pool = all_labels;
      std::shuffle(pool.begin(), pool.end(), rng);
      set.assign(pool.begin(), pool.begin() + labels_per_agent);
      std::sort(set.begin(), set.end());
      for (int l : set) seen[l] = 1;
    }
    covered = std::all_of(seen.begin(), seen.end(), [](std::uint8_t s) { return s != 0; });
  }
  if (!covered)
    throw std::runtime_error("partition_label_skew: could not cover every label in 1000 draws");

  std::vector<std::vector<int>> holders(C);
  for (int a = 0; a < n_agents; ++a)
    for (int l : agent_labels[a]) holders[l].push_back(a);

  ShardAssignment shards;
  shards.agent_labels = agent_labels;
  shards.train.assign(n_agents, Dataset{data.dim, data.num_classes, {}, {}});
  shards.test.assign(n_agents, Dataset{data.dim, data.num_classes, {}, {}});

  for (int l = 0; l < C; ++l) {
    std::vector<int> idx;
    for (int i = 0; i < data.size(); ++i)
      if (data.labels[i] == l) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto& h = holders[l];
    const int base = static_cast<int>(idx.size()) / static_cast<int>(h.size());
    const int rem = static_cast<int>(idx.size()) % static_cast<int>(h.size());
    int cursor = 0;
    for (size_t k = 0; k < h.size(); ++k) {
      int chunk = base + (static_cast<int>(k) < rem ? 1 : 0);
      int n_test = static_cast<int>(std::lround(test_frac * chunk));
      if (n_test >= chunk && chunk > 0) n_test = chunk - 1;
      for (int s = 0; s < chunk; ++s) {
        int i = idx[cursor++];
        auto& dst = (s < chunk - n_test) ? shards.train[h[k]] : shards.test[h[k]];
        dst.append(data.row(i), l);
      }
    }
  }
  return shards;
}

// A "writer" is a fixed affine feature transform applied to a disjoint sample
// block: x -> scale .* (R x) + shift.
struct WriterTransform {
  Eigen::MatrixXd rotation;
  std::vector<double> scale;
  std::vector<double> shift;

  std::vector<double> apply(std::span<const double> x) const {
    const int d = static_cast<int>(x.size());
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = x[i];
    Eigen::VectorXd r = rotation * v;
    std::vector<double> out(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) out[static_cast<size_t>(i)] = scale[i] * r[i] + shift[i];
    return out;
  }

  static WriterTransform identity(int dim) {
    WriterTransform w;
    w.rotation = Eigen::MatrixXd::Identity(dim, dim);
    w.scale.assign(dim, 1.0);
    w.shift.assign(dim, 0.0);
    return w;
  }
};

inline std::vector<WriterTransform> make_writer_transforms(int n_writers, int dim,
                                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> scale_dist(0.5, 2.0);
  std::uniform_real_distribution<double> shift_dist(-1.0, 1.0);
  std::vector<WriterTransform> writers(n_writers);
  for (auto& w : writers) {
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    w.rotation = qr.householderQ();
    // fix column signs so the factorization is unique
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j)
      if (r(j, j) < 0) w.rotation.col(j) *= -1.0;
    w.scale.resize(dim);
    w.shift.resize(dim);
    for (int i = 0; i < dim; ++i) {
      w.scale[static_cast<size_t>(i)] = scale_dist(rng);
      w.shift[static_cast<size_t>(i)] = shift_dist(rng);
    }
  }
  return writers;
}

// Disjoint sample blocks, one per writer; each agent receives the blocks of
// e_i distinct writers (disjoint across agents), 75/25 train/test by default.
inline ShardAssignment partition_feature_skew(const Dataset& base, int n_agents,
                                              int writers_per_agent,
                                              const std::vector<WriterTransform>& writers,
                                              double test_frac, std::uint64_t seed) {
  validate_dataset(base);
  const int n_writers = static_cast<int>(writers.size());
  if (writers_per_agent < 1 || writers_per_agent > n_writers)
    throw std::invalid_argument("partition_feature_skew: writers_per_agent out of range");
  if (static_cast<long long>(writers_per_agent) * n_agents > n_writers)
    throw std::invalid_argument(
        "partition_feature_skew: not enough writers for a disjoint assignment");
  if (base.size() / n_writers < 4)
    throw std::invalid_argument(
        "partition_feature_skew: insufficient samples to give every writer >= 4");
  if (!(test_frac >= 0.0 && test_frac < 1.0))
    throw std::invalid_argument("partition_feature_skew: test_frac must be in [0, 1)");
  std::mt19937_64 rng(seed);

  std::vector<int> idx(static_cast<size_t>(base.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<int>> blocks(n_writers);
  const int bsize = base.size() / n_writers;
  const int brem = base.size() % n_writers;
  int cursor = 0;
  for (int w = 0; w < n_writers; ++w) {
    int chunk = bsize + (w < brem ? 1 : 0);
    blocks[w].assign(idx.begin() + cursor, idx.begin() + cursor + chunk);
    cursor += chunk;
  }

  std::vector<int> writer_ids(n_writers);
  std::iota(writer_ids.begin(), writer_ids.end(), 0);
  std::shuffle(writer_ids.begin(), writer_ids.end(), rng);

  ShardAssignment shards;
  shards.train.assign(n_agents, Dataset{base.dim, base.num_classes, {}, {}});
  shards.test.assign(n_agents, Dataset{base.dim, base.num_classes, {}, {}});
  shards.agent_writers.assign(n_agents, {});

  int next = 0;
  for (int a = 0; a < n_agents; ++a) {
    for (int k = 0; k < writers_per_agent; ++k) {
      int w = writer_ids[next++];
      shards.agent_writers[a].push_back(w);
      auto block = blocks[w];
      std::shuffle(block.begin(), block.end(), rng);
      int n_test = static_cast<int>(std::lround(test_frac * block.size()));
      if (n_test >= static_cast<int>(block.size()) && !block.empty())
        n_test = static_cast<int>(block.size()) - 1;
      for (size_t s = 0; s < block.size(); ++s) {
        auto x = writers[w].apply(base.row(block[s]));
        auto& dst =
            (static_cast<int>(s) < static_cast<int>(block.size()) - n_test) ? shards.train[a]
                                                                            : shards.test[a];
        dst.append(x, base.labels[block[s]]);
      }
    }
    std::sort(shards.agent_writers[a].begin(), shards.agent_writers[a].end());
  }
  return shards;
}

inline ShardAssignment partition_feature_skew(const Dataset& base, int n_agents,
                                              int writers_per_agent, int n_writers,
                                              double test_frac, std::uint64_t seed) {
  auto writers = make_writer_transforms(n_writers, base.dim, seed ^ 0x9e3779b97f4a7c15ULL);
  return partition_feature_skew(base, n_agents, writers_per_agent, writers, test_frac, seed);
}

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("load_idx: truncated file while reading " + what);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace detail

// IDX image/label pair (the MNIST container format). Pixels scaled to [0,1],
// row-major flattening.
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("load_idx: cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("load_idx: cannot open " + labels_path);

  const std::uint32_t img_magic = detail::read_be32(img, "image magic");
  if (img_magic != 0x00000803u)
    throw std::runtime_error("load_idx: bad image magic number in " + images_path);
  const std::uint32_t lab_magic = detail::read_be32(lab, "label magic");
  if (lab_magic != 0x00000801u)
    throw std::runtime_error("load_idx: bad label magic number in " + labels_path);

  const std::uint32_t n_img = detail::read_be32(img, "image count");
  const std::uint32_t rows = detail::read_be32(img, "row count");
  const std::uint32_t cols = detail::read_be32(img, "column count");
  const std::uint32_t n_lab = detail::read_be32(lab, "label count");
  if (n_img != n_lab)
    throw std::runtime_error("load_idx: image/label count mismatch (" + std::to_string(n_img) +
                             " vs " + std::to_string(n_lab) + ")");

  Dataset out;
  out.dim = static_cast<int>(rows * cols);
  std::vector<unsigned char> buf(static_cast<size_t>(out.dim));
  out.features.reserve(static_cast<size_t>(n_img) * out.dim);
  out.labels.reserve(n_img);
  int max_label = 0;
  for (std::uint32_t i = 0; i < n_img; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()), out.dim);
    if (!img) throw std::runtime_error("load_idx: truncated image data in " + images_path);
    for (unsigned char px : buf) out.features.push_back(px / 255.0);
    char y = 0;
    lab.read(&y, 1);
    if (!lab) throw std::runtime_error("load_idx: truncated label data in " + labels_path);
    out.labels.push_back(static_cast<unsigned char>(y));
    max_label = std::max(max_label, out.labels.back());
  }
  out.num_classes = max_label + 1;
  return out;
}

// Text-table shard dump for cross-language replay: label then features, one
// sample per row.
inline void dump_dataset_csv(const Dataset& d, std::ostream& out) {
  out << "label";
  for (int k = 0; k < d.dim; ++k) out << ",f" << k;
  out << '\n';
  char num[64];
  for (int i = 0; i < d.size(); ++i) {
    out << d.labels[i];
    auto x = d.row(i);
    for (double v : x) {
      std::snprintf(num, sizeof(num), "%.17g", v);
      out << ',' << num;
    }
    out << '\n';
  }
}

}  // namespace gatta
