#pragma once

#include <iostream>
#include <numeric>
#include <utility>
#include <vector>

#include "skewgcn/graph.hpp"
#include "skewgcn/rng.hpp"
#include "skewgcn/types.hpp"

namespace skewgcn {

struct SbmSpec {
  std::size_t n_nodes = 400;
  std::size_t n_blocks = 4;
  double p_in = 0.1;
  double p_out = 0.01;
  std::size_t feature_dim = 16;
  double noise = 1.0;  // standard deviation of the Gaussian feature noise
  std::uint64_t seed = 1;

  void validate() const {
    require(n_blocks >= 1, "SBM needs at least one block");
    require(n_nodes >= n_blocks, "SBM needs at least one node per block");
    require(p_out >= 0.0 && p_in <= 1.0 && p_out <= p_in, "SBM needs 0 <= p_out <= p_in <= 1");
    require(feature_dim >= n_blocks, "feature_dim must hold the one-hot block code");
    require(noise >= 0.0, "feature noise must be >= 0");
  }

  friend bool operator==(const SbmSpec&, const SbmSpec&) = default;
};

inline int sbm_block_of(const SbmSpec& spec, NodeId v) {
  return static_cast<int>(v % spec.n_blocks);
}

// Stochastic block model with labels = block id (node v sits in block
// v mod n_blocks), features = one-hot(block) + N(0, noise^2), and a seeded
// 70/15/15 train/val/test split. The graph is returned un-normalized.
inline WeightedGraph synth_sbm(const SbmSpec& spec) {
  spec.validate();
  if (spec.p_in == 0.0 && spec.n_nodes > 1)
    std::cerr << "warning: SBM with p_in = p_out = 0 has no edges\n";
  const std::size_t n = spec.n_nodes;

  Rng edge_rng = make_rng(spec.seed, "sbm-edges");
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = sbm_block_of(spec, u) == sbm_block_of(spec, v) ? spec.p_in : spec.p_out;
      if (p > 0.0 && uniform01(edge_rng) < p) edges.emplace_back(u, v);
    }
  WeightedGraph g = build_undirected(n, edges);

  Rng feat_rng = make_rng(spec.seed, "sbm-features");
  g.features = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.feature_dim));
  g.labels.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    g.labels[v] = sbm_block_of(spec, v);
    g.features(v, g.labels[v]) = 1.0;
    if (spec.noise > 0.0)
      for (std::size_t k = 0; k < spec.feature_dim; ++k)
        g.features(v, static_cast<Eigen::Index>(k)) += spec.noise * standard_normal(feat_rng);
  }

  Rng mask_rng = make_rng(spec.seed, "sbm-masks");
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(mask_rng, i)]);
  const std::size_t n_train = n * 70 / 100;
  const std::size_t n_val = n * 15 / 100;
  g.splits.assign(n, Split::test);
  for (std::size_t i = 0; i < n_train; ++i) g.splits[order[i]] = Split::train;
  for (std::size_t i = n_train; i < n_train + n_val; ++i) g.splits[order[i]] = Split::val;
  return g;
}

}  // namespace skewgcn
