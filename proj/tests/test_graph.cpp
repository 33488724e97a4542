#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "skewgcn/graph.hpp"
#include "test_util.hpp"

using namespace skewgcn;
using skewgcn::testing::random_graph;

namespace {

WeightedGraph parse(const std::string& text, std::optional<std::size_t> hint = std::nullopt) {
  std::istringstream in(text);
  return parse_edge_list(in, hint);
}

WeightedGraph path3() { return normalize_weights(parse("0 1\n1 2")); }

}  // namespace

TEST(EdgeList, PathGraph) {
  const auto g = parse("0 1\n1 2");
  EXPECT_EQ(g.n_nodes, 3u);
  EXPECT_EQ(g.nnz(), 4u);
  EXPECT_FALSE(g.normalized);
  EXPECT_NO_THROW(g.validate());
  for (double w : g.weights) EXPECT_EQ(w, 1.0);
}

TEST(EdgeList, DuplicatesCollapse) {
  const auto once = parse("0 1");
  const auto twice = parse("0 1\n0 1\n1 0");
  EXPECT_EQ(once.neighbors, twice.neighbors);
  EXPECT_EQ(once.offsets, twice.offsets);
}

TEST(EdgeList, MaxIdRuleAndHint) {
  const auto g = parse("5 7");
  EXPECT_EQ(g.n_nodes, 8u);
  for (NodeId v : {0u, 1u, 2u, 3u, 4u, 6u}) EXPECT_EQ(g.degree(v), 0u);
  EXPECT_EQ(parse("5 7", 20).n_nodes, 20u);
  EXPECT_EQ(parse("5 7", 3).n_nodes, 8u);
}

TEST(EdgeList, CommentsAndBlankLines) {
  const auto g = parse("# header\n\n0 1\n  # indented comment\n1 2\n");
  EXPECT_EQ(g.nnz(), 4u);
}

TEST(EdgeList, MalformedLineReportsLineNumber) {
  try {
    parse("0 1\n# ok\n1 x\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("0 1 2"), ParseError);
  EXPECT_THROW(parse("-1 2"), ParseError);
  EXPECT_THROW(parse("7"), ParseError);
}

TEST(EdgeList, IdOverflow) {
  try {
    parse("0 4294967295");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("overflow"), std::string::npos);
  }
  EXPECT_THROW(parse("0 99999999999999999999999"), ParseError);
}

TEST(EdgeList, UnreadableFile) {
  EXPECT_THROW(load_edge_list("/nonexistent/edges.txt"), IoError);
}

TEST(EdgeList, RoundTripThroughWriter) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = random_graph(40, 0.1, seed);
    std::ostringstream out;
    write_edge_list(g, out);
    const auto back = parse(out.str(), g.n_nodes);
    EXPECT_EQ(back.offsets, g.offsets);
    EXPECT_EQ(back.neighbors, g.neighbors);
  }
}

TEST(Normalize, PathWeights) {
  const auto g = path3();
  EXPECT_NO_THROW(g.validate());
  EXPECT_EQ(g.degree(0), 2u);
  EXPECT_EQ(g.degree(1), 3u);
  EXPECT_EQ(g.degree(2), 2u);
  EXPECT_NEAR(g.weight(0, 1), 0.40824829046386301, 1e-15);
  EXPECT_NEAR(g.weight(0, 1), 1.0 / std::sqrt(6.0), 1e-15);
  EXPECT_DOUBLE_EQ(g.weight(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(g.weight(1, 1), 1.0 / 3.0);
  EXPECT_EQ(g.weight(0, 2), 0.0);
}

TEST(Normalize, SingleIsolatedNode) {
  WeightedGraph g = normalize_weights(build_undirected(1, {}));
  ASSERT_EQ(g.nnz(), 1u);
  EXPECT_EQ(g.neighbors[0], 0u);
  EXPECT_EQ(g.weights[0], 1.0);
}

TEST(Normalize, CompleteK2) {
  const auto g = normalize_weights(parse("0 1"));
  ASSERT_EQ(g.nnz(), 4u);
  for (double w : g.weights) EXPECT_DOUBLE_EQ(w, 0.5);
}

TEST(Normalize, SymmetricAndExactOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto raw = random_graph(30 + seed, 0.15, seed);
    const auto g = normalize_weights(raw);
    ASSERT_NO_THROW(g.validate());
    for (NodeId i = 0; i < g.n_nodes; ++i) {
      const double di = static_cast<double>(raw.degree(i) + 1);
      auto row = g.row(i);
      for (std::size_t e = 0; e < row.size(); ++e) {
        const NodeId j = row[e];
        const double dj = static_cast<double>(raw.degree(j) + 1);
        EXPECT_EQ(g.row_weights(i)[e], 1.0 / std::sqrt(di * dj));
        EXPECT_EQ(g.weight(i, j), g.weight(j, i));
      }
    }
  }
}

TEST(NeighborUnion, Examples) {
  const auto g = path3();
  EXPECT_EQ(neighbor_union(g, NodeSet::from_sorted({1})).vec(), (std::vector<NodeId>{0, 1, 2}));
  EXPECT_TRUE(neighbor_union(g, NodeSet{}).empty());
  EXPECT_EQ(neighbor_union(g, NodeSet::iota(3)), NodeSet::iota(3));
  EXPECT_THROW(neighbor_union(g, NodeSet::from_sorted({5})), ContractError);
}

TEST(NeighborUnion, ContainsSourceSet) {
  Rng rng(7);
  const auto g = normalize_weights(random_graph(50, 0.05, 3));
  for (int t = 0; t < 20; ++t) {
    const auto s = skewgcn::testing::random_subset(50, 0.2, rng);
    const auto n = neighbor_union(g, s);
    for (NodeId v : s) EXPECT_TRUE(n.contains(v));
  }
}

TEST(ColumnNorms, PathExample) {
  const auto g = path3();
  const auto norms = column_norms(g, NodeSet::from_sorted({1}), NodeSet::iota(3));
  EXPECT_NEAR(norms[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(norms[1], 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(norms[2], 1.0 / 6.0, 1e-15);
}

TEST(ColumnNorms, K2Example) {
  const auto g = normalize_weights(parse("0 1"));
  const auto norms = column_norms(g, NodeSet::from_sorted({0}), NodeSet::iota(2));
  EXPECT_DOUBLE_EQ(norms[0], 0.25);
  EXPECT_DOUBLE_EQ(norms[1], 0.25);
}

TEST(ColumnNorms, EmptySourceAndContractViolation) {
  const auto g = path3();
  EXPECT_TRUE(column_norms(g, NodeSet{}, NodeSet{}).empty());
  // Node 2 is not a neighbor of node 0.
  EXPECT_THROW(column_norms(g, NodeSet::from_sorted({0}), NodeSet::iota(3)), ContractError);
}

TEST(ColumnNorms, MatchesDenseBruteForce) {
  Rng rng(11);
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const std::size_t n = 20 + 2 * seed;
    const auto g = normalize_weights(random_graph(n, 0.12, seed));
    Matrix dense = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = 0; j < n; ++j) dense(i, j) = g.weight(i, j);
    const auto s = skewgcn::testing::random_subset(n, 0.3, rng);
    const auto cand = neighbor_union(g, s);
    const auto norms = column_norms(g, s, cand);
    for (std::size_t k = 0; k < cand.size(); ++k) {
      double expect = 0.0;
      for (NodeId i : s) expect += dense(i, cand[k]) * dense(i, cand[k]);
      EXPECT_NEAR(norms[k], expect, 1e-14);
      EXPECT_GT(norms[k], 0.0);
    }
  }
}

TEST(NodeAttributes, LoadCsvFiles) {
  skewgcn::testing::TempDir dir("graph_attrs");
  skewgcn::testing::write_text(dir.file("f.csv"), "1,2\n3.5,-4\n0,0\n");
  skewgcn::testing::write_text(dir.file("l.csv"), "node,label\n0,1\n2,0\n");
  skewgcn::testing::write_text(dir.file("m.csv"), "node,split\n0,train\n1,val\n2,test\n");
  const Matrix x = load_features_csv(dir.file("f.csv"), 3);
  EXPECT_EQ(x.rows(), 3);
  EXPECT_EQ(x(1, 1), -4.0);
  const auto labels = load_labels_csv(dir.file("l.csv"), 3);
  EXPECT_EQ(labels, (std::vector<int>{1, -1, 0}));
  const auto masks = load_masks_csv(dir.file("m.csv"), 3);
  EXPECT_EQ(masks[1], Split::val);

  skewgcn::testing::write_text(dir.file("bad.csv"), "node,split\n0,holdout\n");
  EXPECT_THROW(load_masks_csv(dir.file("bad.csv"), 3), ParseError);
  EXPECT_THROW(load_features_csv(dir.file("f.csv"), 4), Error);
  EXPECT_THROW(load_labels_csv(dir.file("m.csv"), 3), ParseError);
}
