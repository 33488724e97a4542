#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "skewgcn/csv.hpp"
#include "skewgcn/types.hpp"

namespace skewgcn {

using Matrix = Eigen::MatrixXd;
using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class Split : std::uint8_t { none, train, val, test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    default: return "none";
  }
}

// Undirected graph in canonical CSR form. Edge weights are the convolution
// coefficients w_ij once normalize_weights has run; before that they are 1.
// Node features, labels and split masks are optional and empty when absent.
struct WeightedGraph {
  std::size_t n_nodes = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<NodeId> neighbors;
  std::vector<double> weights;
  bool normalized = false;

  Matrix features;           // n_nodes x feature_dim
  std::vector<int> labels;   // -1 means unlabeled
  std::vector<Split> splits;

  std::size_t nnz() const { return neighbors.size(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features.cols()); }
  bool has_features() const { return features.rows() == static_cast<Eigen::Index>(n_nodes) && n_nodes > 0; }
  bool has_labels() const { return labels.size() == n_nodes && n_nodes > 0; }
  bool has_splits() const { return splits.size() == n_nodes && n_nodes > 0; }

  std::span<const NodeId> row(NodeId i) const {
    return {neighbors.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  std::span<const double> row_weights(NodeId i) const {
    return {weights.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  std::size_t degree(NodeId i) const { return offsets[i + 1] - offsets[i]; }

  // w_ij, or 0 when (i, j) is not stored.
  double weight(NodeId i, NodeId j) const {
    auto r = row(i);
    auto it = std::lower_bound(r.begin(), r.end(), j);
    if (it == r.end() || *it != j) return 0.0;
    return weights[offsets[i] + static_cast<std::size_t>(it - r.begin())];
  }

  int n_classes() const {
    int c = 0;
    for (int l : labels) c = std::max(c, l + 1);
    return c;
  }

  NodeSet nodes_in(Split s) const {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < splits.size(); ++i)
      if (splits[i] == s) out.push_back(static_cast<NodeId>(i));
    return NodeSet::from_sorted(std::move(out));
  }

  // Checks the CSR invariants; throws ContractError on the first violation.
  void validate() const {
    require(offsets.size() == n_nodes + 1, "offsets must have n_nodes+1 entries");
    require(offsets.front() == 0, "offsets[0] must be 0");
    require(offsets.back() == neighbors.size(), "offsets[n] must equal nnz");
    require(weights.size() == neighbors.size(), "weights must align with neighbors");
    for (std::size_t i = 0; i < n_nodes; ++i) {
      require(offsets[i] <= offsets[i + 1], "offsets must be nondecreasing");
      for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) {
        require(neighbors[e] < n_nodes, "neighbor id out of range");
        if (e > offsets[i])
          require(neighbors[e - 1] < neighbors[e], "row ids must be strictly increasing");
        if (normalized)
          require(std::isfinite(weights[e]) && weights[e] > 0.0,
                  "normalized weights must be finite and positive");
      }
      if (normalized)
        require(std::binary_search(neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                                   neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]),
                                   static_cast<NodeId>(i)),
                "normalized rows must contain a self-loop");
    }
  }
};

// Builds an undirected, unit-weight graph. Each edge is stored in both rows,
// duplicates collapse and self-loops are dropped (normalization adds them).
inline WeightedGraph build_undirected(std::size_t n_nodes,
                                      std::span<const std::pair<NodeId, NodeId>> edges) {
  std::vector<std::vector<NodeId>> adj(n_nodes);
  for (auto [u, v] : edges) {
    require(u < n_nodes && v < n_nodes, "edge endpoint out of range");
    if (u == v) continue;
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  WeightedGraph g;
  g.n_nodes = n_nodes;
  g.offsets.assign(n_nodes + 1, 0);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    auto& r = adj[i];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    g.offsets[i + 1] = g.offsets[i] + r.size();
  }
  g.neighbors.reserve(g.offsets.back());
  for (auto& r : adj) g.neighbors.insert(g.neighbors.end(), r.begin(), r.end());
  g.weights.assign(g.neighbors.size(), 1.0);
  return g;
}

// Reads "u v" lines; blank lines and lines starting with '#' are skipped.
inline WeightedGraph parse_edge_list(std::istream& in,
                                     std::optional<std::size_t> n_hint = std::nullopt) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::string line;
  std::size_t lineno = 0;
  std::size_t max_id_plus_one = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = csv::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    std::istringstream ls{std::string(sv)};
    std::string a, b, extra;
    if (!(ls >> a >> b) || (ls >> extra))
      throw ParseError("expected 'u v' but got '" + std::string(sv) + "'", lineno);
    std::uint64_t u = 0, v = 0;
    if (!csv::parse_number(a, u) || !csv::parse_number(b, v)) {
      // from_chars reports overflow as failure too; distinguish for the message.
      if (!a.empty() && !b.empty() &&
          a.find_first_not_of("0123456789") == std::string::npos &&
          b.find_first_not_of("0123456789") == std::string::npos)
        throw ParseError("node id overflows the index type", lineno);
      throw ParseError("malformed edge '" + std::string(sv) + "'", lineno);
    }
    if (u > kMaxNodeId || v > kMaxNodeId)
      throw ParseError("node id overflows the index type", lineno);
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    max_id_plus_one = std::max<std::size_t>(max_id_plus_one, std::max(u, v) + 1);
  }
  std::size_t n = max_id_plus_one;
  if (n_hint && *n_hint > n) n = *n_hint;
  return build_undirected(n, edges);
}

inline WeightedGraph load_edge_list(const std::string& path,
                                    std::optional<std::size_t> n_hint = std::nullopt) {
  auto in = csv::open_in(path);
  return parse_edge_list(in, n_hint);
}

// Writes each undirected non-loop edge once as "u v" with u < v.
inline void write_edge_list(const WeightedGraph& g, std::ostream& out) {
  for (NodeId i = 0; i < g.n_nodes; ++i)
    for (NodeId j : g.row(i))
      if (i < j) out << i << ' ' << j << '\n';
}

// Symmetric normalization with self-loops: w_ij = 1/sqrt(d_i d_j), where d
// counts the self-loop.
inline WeightedGraph normalize_weights(const WeightedGraph& g) {
  WeightedGraph out;
  out.n_nodes = g.n_nodes;
  out.offsets.assign(g.n_nodes + 1, 0);
  out.neighbors.reserve(g.nnz() + g.n_nodes);
  for (NodeId i = 0; i < g.n_nodes; ++i) {
    auto r = g.row(i);
    std::vector<NodeId> row(r.begin(), r.end());
    row.push_back(i);
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    out.neighbors.insert(out.neighbors.end(), row.begin(), row.end());
    out.offsets[i + 1] = out.neighbors.size();
  }
  out.weights.resize(out.neighbors.size());
  for (NodeId i = 0; i < out.n_nodes; ++i) {
    const double di = static_cast<double>(out.degree(i));
    for (std::size_t e = out.offsets[i]; e < out.offsets[i + 1]; ++e) {
      const double dj = static_cast<double>(out.degree(out.neighbors[e]));
      out.weights[e] = 1.0 / std::sqrt(di * dj);
    }
  }
  out.normalized = true;
  out.features = g.features;
  out.labels = g.labels;
  out.splits = g.splits;
  return out;
}

inline void check_nodes(const WeightedGraph& g, const NodeSet& s) {
  if (!s.empty() && s.vec().back() >= g.n_nodes)
    throw ContractError("node id " + std::to_string(s.vec().back()) + " out of range");
}

// N(s): union of the adjacency rows of s. Self-loops make s a subset of N(s)
// on a normalized graph.
inline NodeSet neighbor_union(const WeightedGraph& g, const NodeSet& s) {
  check_nodes(g, s);
  std::vector<NodeId> out;
  for (NodeId i : s) {
    auto r = g.row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return NodeSet::from_unsorted(std::move(out));
}

// ||w_{*j}||^2 = sum_{i in s_l} w_ij^2 for each candidate j.
inline std::vector<double> column_norms(const WeightedGraph& g, const NodeSet& s_l,
                                        const NodeSet& candidates) {
  check_nodes(g, s_l);
  check_nodes(g, candidates);
  std::vector<double> norms(candidates.size(), 0.0);
  for (NodeId i : s_l) {
    auto r = g.row(i);
    auto w = g.row_weights(i);
    for (std::size_t e = 0; e < r.size(); ++e) {
      const std::size_t k = candidates.index_of(r[e]);
      if (k < candidates.size()) norms[k] += w[e] * w[e];
    }
  }
  for (std::size_t k = 0; k < norms.size(); ++k)
    if (!(norms[k] > 0.0))
      throw ContractError("candidate " + std::to_string(candidates[k]) +
                          " is not a neighbor of the source set");
  return norms;
}

// Exact operator P as a sparse row-major matrix.
inline SparseRows adjacency_matrix(const WeightedGraph& g) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(g.nnz());
  for (NodeId i = 0; i < g.n_nodes; ++i) {
    auto r = g.row(i);
    auto w = g.row_weights(i);
    for (std::size_t e = 0; e < r.size(); ++e) t.emplace_back(i, r[e], w[e]);
  }
  SparseRows m(static_cast<Eigen::Index>(g.n_nodes), static_cast<Eigen::Index>(g.n_nodes));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// Rows of `x` selected by `nodes`.
inline Matrix gather_rows(const Matrix& x, const NodeSet& nodes) {
  Matrix out(static_cast<Eigen::Index>(nodes.size()), x.cols());
  for (std::size_t k = 0; k < nodes.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = x.row(nodes[k]);
  return out;
}

// ---------------------------------------------------------------------------
// Node attribute files.

// Features: one row per node, comma-separated reals, row r = node r.
inline Matrix load_features_csv(const std::string& path, std::size_t n_nodes) {
  auto in = csv::open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    auto fields = csv::split(line);
    std::vector<double> r(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k)
      if (!csv::parse_number(fields[k], r[k]))
        throw ParseError("bad feature value '" + std::string(fields[k]) + "'", lineno);
    if (!rows.empty() && r.size() != rows.front().size())
      throw ParseError("inconsistent feature width", lineno);
    rows.push_back(std::move(r));
  }
  if (rows.size() != n_nodes)
    throw Error("features file has " + std::to_string(rows.size()) + " rows, expected " +
                std::to_string(n_nodes));
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  Matrix x(static_cast<Eigen::Index>(n_nodes), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (std::size_t k = 0; k < dim; ++k) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return x;
}

namespace detail {
// Iterates "node,value" rows, skipping a header whose first field is not numeric.
template <typename F>
void for_each_node_row(const std::string& path, std::size_t n_nodes, F&& f) {
  auto in = csv::open_in(path);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    auto fields = csv::split(line);
    std::uint64_t node = 0;
    if (fields.size() != 2 || !csv::parse_number(fields[0], node)) {
      if (first) {
        first = false;
        continue;
      }
      throw ParseError("expected 'node,value'", lineno);
    }
    first = false;
    if (node >= n_nodes) throw ParseError("node id out of range", lineno);
    f(static_cast<NodeId>(node), fields[1], lineno);
  }
}
}  // namespace detail

inline std::vector<int> load_labels_csv(const std::string& path, std::size_t n_nodes) {
  std::vector<int> labels(n_nodes, -1);
  detail::for_each_node_row(path, n_nodes, [&](NodeId v, std::string_view val, std::size_t ln) {
    int l = 0;
    if (!csv::parse_number(val, l) || l < 0) throw ParseError("bad label", ln);
    labels[v] = l;
  });
  return labels;
}

inline std::vector<Split> load_masks_csv(const std::string& path, std::size_t n_nodes) {
  std::vector<Split> splits(n_nodes, Split::none);
  detail::for_each_node_row(path, n_nodes, [&](NodeId v, std::string_view val, std::size_t ln) {
    if (val == "train") splits[v] = Split::train;
    else if (val == "val") splits[v] = Split::val;
    else if (val == "test") splits[v] = Split::test;
    else throw ParseError("unknown split '" + std::string(val) + "'", ln);
  });
  return splits;
}

inline void write_features_csv(const Matrix& x, std::ostream& out) {
  out.precision(17);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      if (k) out << ',';
      out << x(i, k);
    }
    out << '\n';
  }
}

inline void write_labels_csv(const std::vector<int>& labels, std::ostream& out) {
  out << "node,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) out << i << ',' << labels[i] << '\n';
}

inline void write_masks_csv(const std::vector<Split>& splits, std::ostream& out) {
  out << "node,split\n";
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] != Split::none) out << i << ',' << to_string(splits[i]) << '\n';
}

}  // namespace skewgcn
