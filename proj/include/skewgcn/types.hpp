#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace skewgcn {

using NodeId = std::uint32_t;
using WorkerId = std::uint32_t;

inline constexpr NodeId kMaxNodeId = std::numeric_limits<NodeId>::max() - 1;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a caller violates a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

// Sorted, duplicate-free set of node ids.
class NodeSet {
 public:
  NodeSet() = default;

  // Sorts and deduplicates.
  static NodeSet from_unsorted(std::vector<NodeId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    NodeSet s;
    s.ids_ = std::move(ids);
    return s;
  }

  // Takes ownership of an already canonical array; throws if it is not.
  static NodeSet from_sorted(std::vector<NodeId> ids) {
    for (std::size_t i = 1; i < ids.size(); ++i)
      require(ids[i - 1] < ids[i], "NodeSet ids must be strictly increasing");
    NodeSet s;
    s.ids_ = std::move(ids);
    return s;
  }

  // {0, 1, ..., n-1}
  static NodeSet iota(std::size_t n) {
    NodeSet s;
    s.ids_.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.ids_[i] = static_cast<NodeId>(i);
    return s;
  }

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  NodeId operator[](std::size_t i) const { return ids_[i]; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  std::span<const NodeId> ids() const { return ids_; }
  const std::vector<NodeId>& vec() const { return ids_; }

  bool contains(NodeId v) const {
    return std::binary_search(ids_.begin(), ids_.end(), v);
  }

  // Position of v, or size() when absent.
  std::size_t index_of(NodeId v) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), v);
    if (it == ids_.end() || *it != v) return ids_.size();
    return static_cast<std::size_t>(it - ids_.begin());
  }

  friend bool operator==(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<NodeId> ids_;
};

}  // namespace skewgcn
