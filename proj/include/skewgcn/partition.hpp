#pragma once

#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skewgcn/csv.hpp"
#include "skewgcn/rng.hpp"
#include "skewgcn/types.hpp"

namespace skewgcn {

enum class PartitionStrategy { contiguous, hash, random, explicit_file };

inline const char* to_string(PartitionStrategy s) {
  switch (s) {
    case PartitionStrategy::contiguous: return "contiguous";
    case PartitionStrategy::hash: return "hash";
    case PartitionStrategy::random: return "random";
    case PartitionStrategy::explicit_file: return "explicit";
  }
  return "?";
}

inline PartitionStrategy parse_partition_strategy(const std::string& s) {
  if (s == "contiguous") return PartitionStrategy::contiguous;
  if (s == "hash") return PartitionStrategy::hash;
  if (s == "random") return PartitionStrategy::random;
  if (s == "explicit") return PartitionStrategy::explicit_file;
  throw Error("unknown partition strategy '" + s + "'");
}

// Node ownership over K simulated workers.
struct Partition {
  std::size_t n_workers = 1;
  std::vector<WorkerId> owner;
  PartitionStrategy strategy = PartitionStrategy::contiguous;

  bool is_local(NodeId v, WorkerId w) const { return owner[v] == w; }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s(n_workers, 0);
    for (WorkerId w : owner) ++s[w];
    return s;
  }

  NodeSet owned_by(WorkerId w, const NodeSet& among) const {
    std::vector<NodeId> out;
    for (NodeId v : among)
      if (owner[v] == w) out.push_back(v);
    return NodeSet::from_sorted(std::move(out));
  }
};

// Evenly chunks `order` so chunk w holds ceil(n/k) or floor(n/k) nodes; the
// first n mod k chunks are the larger ones.
inline std::vector<WorkerId> chunk_evenly(const std::vector<NodeId>& order, std::size_t k) {
  const std::size_t n = order.size();
  std::vector<WorkerId> owner(n, 0);
  const std::size_t base = n / k, extra = n % k;
  std::size_t pos = 0;
  for (std::size_t w = 0; w < k; ++w) {
    const std::size_t len = base + (w < extra ? 1 : 0);
    for (std::size_t t = 0; t < len; ++t) owner[order[pos++]] = static_cast<WorkerId>(w);
  }
  return owner;
}

inline Partition load_partition_csv(const std::string& path, std::size_t n, std::size_t k) {
  require(k >= 1, "partition needs at least one worker");
  auto in = csv::open_in(path);
  std::vector<std::int64_t> owner(n, -1);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    auto f = csv::split(line);
    std::uint64_t node = 0, w = 0;
    if (f.size() != 2 || !csv::parse_number(f[0], node) || !csv::parse_number(f[1], w)) {
      if (first) {
        first = false;
        continue;
      }
      throw ParseError("expected 'node,worker'", lineno);
    }
    first = false;
    if (node >= n) throw ParseError("node id out of range", lineno);
    if (w >= k) throw ParseError("worker id out of range", lineno);
    owner[node] = static_cast<std::int64_t>(w);
  }
  Partition p;
  p.n_workers = k;
  p.strategy = PartitionStrategy::explicit_file;
  p.owner.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (owner[v] < 0) throw Error("partition file is missing node " + std::to_string(v));
    p.owner[v] = static_cast<WorkerId>(owner[v]);
  }
  return p;
}

// contiguous: worker w owns a consecutive id range, sizes differ by <= 1.
// hash: owner = id mod k. random: seeded permutation, chunked like contiguous.
// explicit: read from `file` ("node,worker" CSV).
inline Partition partition_nodes(std::size_t n, std::size_t k, PartitionStrategy strategy,
                                 std::uint64_t seed = 0,
                                 const std::optional<std::string>& file = std::nullopt) {
  if (k == 0) throw ContractError("partition needs at least one worker (k=0)");
  if (strategy == PartitionStrategy::explicit_file) {
    if (!file) throw ContractError("explicit partition requires a file");
    return load_partition_csv(*file, n, k);
  }
  Partition p;
  p.n_workers = k;
  p.strategy = strategy;
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  switch (strategy) {
    case PartitionStrategy::contiguous:
      p.owner = chunk_evenly(order, k);
      break;
    case PartitionStrategy::hash:
      p.owner.resize(n);
      for (std::size_t v = 0; v < n; ++v) p.owner[v] = static_cast<WorkerId>(v % k);
      break;
    case PartitionStrategy::random: {
      Rng rng = make_rng(seed, "partition");
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
      p.owner = chunk_evenly(order, k);
      break;
    }
    default:
      break;
  }
  return p;
}

struct LocalRemote {
  NodeSet local;
  NodeSet remote;
};

inline LocalRemote split_local_remote(const NodeSet& candidates, const Partition& p, WorkerId worker) {
  require(worker < p.n_workers, "worker id out of range");
  std::vector<NodeId> l, r;
  for (NodeId v : candidates) (p.owner[v] == worker ? l : r).push_back(v);
  return {NodeSet::from_sorted(std::move(l)), NodeSet::from_sorted(std::move(r))};
}

}  // namespace skewgcn
