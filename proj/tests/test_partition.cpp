#include <gtest/gtest.h>

#include <algorithm>

#include "skewgcn/partition.hpp"
#include "test_util.hpp"

using namespace skewgcn;

TEST(Partition, ContiguousEvenSplit) {
  const auto p = partition_nodes(8, 4, PartitionStrategy::contiguous);
  EXPECT_EQ(p.owner, (std::vector<WorkerId>{0, 0, 1, 1, 2, 2, 3, 3}));
}

TEST(Partition, ContiguousRemainder) {
  const auto p = partition_nodes(5, 2, PartitionStrategy::contiguous);
  EXPECT_EQ(p.sizes(), (std::vector<std::size_t>{3, 2}));
  EXPECT_EQ(p.owner, (std::vector<WorkerId>{0, 0, 0, 1, 1}));
}

TEST(Partition, SingleWorker) {
  const auto p = partition_nodes(10, 1, PartitionStrategy::random, 3);
  for (auto w : p.owner) EXPECT_EQ(w, 0u);
  const auto lr = split_local_remote(NodeSet::iota(10), p, 0);
  EXPECT_EQ(lr.local.size(), 10u);
  EXPECT_TRUE(lr.remote.empty());
}

TEST(Partition, ZeroWorkersRejected) {
  EXPECT_THROW(partition_nodes(5, 0, PartitionStrategy::contiguous), ContractError);
}

TEST(Partition, Hash) {
  const auto p = partition_nodes(7, 3, PartitionStrategy::hash);
  EXPECT_EQ(p.owner, (std::vector<WorkerId>{0, 1, 2, 0, 1, 2, 0}));
}

TEST(Partition, BalancedSizesForAllSmallShapes) {
  for (std::size_t k = 1; k <= 9; ++k)
    for (std::size_t n = k; n <= 60; ++n)
      for (auto strat : {PartitionStrategy::contiguous, PartitionStrategy::random}) {
        const auto p = partition_nodes(n, k, strat, n * 31 + k);
        const auto s = p.sizes();
        const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
        EXPECT_LE(*hi - *lo, 1u) << "n=" << n << " k=" << k;
        for (auto w : p.owner) EXPECT_LT(w, k);
      }
}

TEST(Partition, RandomIsSeedDeterministic) {
  const auto a = partition_nodes(100, 4, PartitionStrategy::random, 42);
  const auto b = partition_nodes(100, 4, PartitionStrategy::random, 42);
  const auto c = partition_nodes(100, 4, PartitionStrategy::random, 43);
  EXPECT_EQ(a.owner, b.owner);
  EXPECT_NE(a.owner, c.owner);
}

TEST(Partition, ExplicitFile) {
  skewgcn::testing::TempDir dir("partition");
  skewgcn::testing::write_text(dir.file("p.csv"), "node,worker\n0,1\n1,0\n2,1\n");
  const auto p = partition_nodes(3, 2, PartitionStrategy::explicit_file, 0, dir.file("p.csv"));
  EXPECT_EQ(p.owner, (std::vector<WorkerId>{1, 0, 1}));

  skewgcn::testing::write_text(dir.file("missing.csv"), "0,1\n2,1\n");
  EXPECT_THROW(partition_nodes(3, 2, PartitionStrategy::explicit_file, 0, dir.file("missing.csv")),
               Error);
  skewgcn::testing::write_text(dir.file("range.csv"), "0,1\n1,5\n2,0\n");
  EXPECT_THROW(partition_nodes(3, 2, PartitionStrategy::explicit_file, 0, dir.file("range.csv")),
               ParseError);
  EXPECT_THROW(partition_nodes(3, 2, PartitionStrategy::explicit_file), ContractError);
}

TEST(SplitLocalRemote, Example) {
  Partition p;
  p.n_workers = 2;
  p.owner = {0, 0, 1, 1};
  const auto lr = split_local_remote(NodeSet::iota(4), p, 0);
  EXPECT_EQ(lr.local.vec(), (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(lr.remote.vec(), (std::vector<NodeId>{2, 3}));
  const auto empty = split_local_remote(NodeSet{}, p, 1);
  EXPECT_TRUE(empty.local.empty() && empty.remote.empty());
  EXPECT_THROW(split_local_remote(NodeSet::iota(4), p, 2), ContractError);
}

TEST(SplitLocalRemote, IsASetPartition) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 10 + uniform_index(rng, 90);
    const std::size_t k = 1 + uniform_index(rng, 6);
    const auto p = partition_nodes(n, k, PartitionStrategy::random, t);
    const auto cand = skewgcn::testing::random_subset(n, 0.4, rng);
    const WorkerId w = static_cast<WorkerId>(uniform_index(rng, k));
    const auto [l, r] = split_local_remote(cand, p, w);
    std::vector<NodeId> uni, inter;
    std::set_union(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(uni));
    std::set_intersection(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(inter));
    EXPECT_EQ(uni, cand.vec());
    EXPECT_TRUE(inter.empty());
    for (NodeId v : l) EXPECT_EQ(p.owner[v], w);
    for (NodeId v : r) EXPECT_NE(p.owner[v], w);
  }
}
