#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "skewgcn/csv.hpp"
#include "skewgcn/graph.hpp"
#include "skewgcn/rng.hpp"

namespace skewgcn {

// A graph directory holds
//   edges.txt     "u v" per line, '#' comments allowed
//   features.csv  one comma-separated row per node (optional)
//   labels.csv    "node,label" (optional)
//   masks.csv     "node,split", split in {train, val, test} (optional)
// The node count is the feature row count when features exist, otherwise
// max edge id + 1.
namespace graph_dir {
inline constexpr const char* kEdges = "edges.txt";
inline constexpr const char* kFeatures = "features.csv";
inline constexpr const char* kLabels = "labels.csv";
inline constexpr const char* kMasks = "masks.csv";
}  // namespace graph_dir

inline std::size_t count_nonempty_lines(const std::string& path) {
  auto in = csv::open_in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!csv::trim(line).empty()) ++n;
  return n;
}

// Loads a graph directory; the result is un-normalized.
inline WeightedGraph load_graph_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw IoError("'" + dir + "' is not a directory");
  const auto edges = (root / graph_dir::kEdges).string();
  const auto feats = (root / graph_dir::kFeatures).string();
  const auto labels = (root / graph_dir::kLabels).string();
  const auto masks = (root / graph_dir::kMasks).string();

  std::optional<std::size_t> n_hint;
  if (fs::exists(feats)) n_hint = count_nonempty_lines(feats);
  WeightedGraph g = load_edge_list(edges, n_hint);
  if (n_hint && g.n_nodes > *n_hint)
    throw Error("edge list references node " + std::to_string(g.n_nodes - 1) +
                " beyond the " + std::to_string(*n_hint) + " feature rows");
  if (fs::exists(feats)) g.features = load_features_csv(feats, g.n_nodes);
  if (fs::exists(labels)) g.labels = load_labels_csv(labels, g.n_nodes);
  if (fs::exists(masks)) g.splits = load_masks_csv(masks, g.n_nodes);
  return g;
}

inline void write_graph_dir(const WeightedGraph& g, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  fs::create_directories(root);
  {
    auto out = csv::open_out((root / graph_dir::kEdges).string());
    out << "# " << g.n_nodes << " nodes\n";
    write_edge_list(g, out);
  }
  if (g.has_features()) {
    auto out = csv::open_out((root / graph_dir::kFeatures).string());
    write_features_csv(g.features, out);
  }
  if (g.has_labels()) {
    auto out = csv::open_out((root / graph_dir::kLabels).string());
    write_labels_csv(g.labels, out);
  }
  if (g.has_splits()) {
    auto out = csv::open_out((root / graph_dir::kMasks).string());
    write_masks_csv(g.splits, out);
  }
}

struct LinqsSplit {
  std::size_t train_per_class = 20;
  std::size_t n_val = 500;
  std::size_t n_test = 1000;
};

// Reads the LINQS citation format (Cora, CiteSeer):
//   <name>.content  "paper_id f_1 ... f_d class" per line, whitespace separated
//   <name>.cites    "cited_id citing_id" per line
// Nodes are numbered in content order and classes in sorted name order.
// Citations naming unknown papers are skipped with a warning. Splits take
// train_per_class nodes of each class for training, then n_val and n_test
// from the remaining nodes, all by a seeded shuffle.
inline WeightedGraph import_linqs(const std::string& content_path, const std::string& cites_path,
                                  std::uint64_t seed, const LinqsSplit& split = {}) {
  auto content = csv::open_in(content_path);
  std::map<std::string, NodeId> index;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> classes;
  std::string line;
  std::size_t lineno = 0, dim = 0;
  while (std::getline(content, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tok{std::istream_iterator<std::string>(ls), std::istream_iterator<std::string>()};
    if (tok.empty()) continue;
    if (tok.size() < 3) throw ParseError("expected 'id features... class'", lineno);
    if (rows.empty()) dim = tok.size() - 2;
    if (tok.size() - 2 != dim) throw ParseError("inconsistent feature count", lineno);
    if (!index.emplace(tok.front(), static_cast<NodeId>(rows.size())).second)
      throw ParseError("duplicate paper id '" + tok.front() + "'", lineno);
    std::vector<double> f(dim);
    for (std::size_t k = 0; k < dim; ++k)
      if (!csv::parse_number(tok[k + 1], f[k])) throw ParseError("bad feature value '" + tok[k + 1] + "'", lineno);
    rows.push_back(std::move(f));
    classes.push_back(tok.back());
  }
  const std::size_t n = rows.size();
  if (n == 0) throw Error("'" + content_path + "' holds no papers");

  auto cites = csv::open_in(cites_path);
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::size_t skipped = 0;
  lineno = 0;
  while (std::getline(cites, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;
    if (!(ls >> b) || (ls >> extra)) throw ParseError("expected 'cited citing'", lineno);
    const auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end() || ib == index.end()) {
      ++skipped;
      continue;
    }
    edges.emplace_back(ia->second, ib->second);
  }
  if (skipped) std::cerr << "warning: skipped " << skipped << " citation(s) naming unknown papers\n";

  WeightedGraph g = build_undirected(n, edges);
  g.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dim; ++k)
      g.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  std::vector<std::string> names = classes;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  g.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    g.labels[i] = static_cast<int>(std::lower_bound(names.begin(), names.end(), classes[i]) - names.begin());

  Rng rng = make_rng(seed, "linqs-split");
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  g.splits.assign(n, Split::none);
  std::vector<std::size_t> taken(names.size(), 0);
  std::vector<NodeId> rest;
  for (NodeId v : order) {
    auto& t = taken[static_cast<std::size_t>(g.labels[v])];
    if (t < split.train_per_class) {
      g.splits[v] = Split::train;
      ++t;
    } else {
      rest.push_back(v);
    }
  }
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (i < split.n_val) g.splits[rest[i]] = Split::val;
    else if (i < split.n_val + split.n_test) g.splits[rest[i]] = Split::test;
  }
  return g;
}

}  // namespace skewgcn
