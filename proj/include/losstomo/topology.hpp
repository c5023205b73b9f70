#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace losstomo {

// Node index. Node 0 is the root (source attachment point); link i joins
// parent(i) to node i, so links are named by their child node.
using NodeId = std::uint32_t;

inline constexpr NodeId kRoot = 0;

struct Link {
  NodeId child = 0;
  NodeId parent = 0;
  double rate = 1.0;  // pass rate in (0, 1]
};

// Immutable rooted multicast tree with per-link true pass rates.
//
// Invariants enforced at construction: ids are contiguous 0..m, parent(i) < i,
// the root has exactly one child, and every non-root internal node has at
// least two children. Child lists are in ascending id order.
class Tree {
 public:
  // Throws InputError when the links do not describe a valid tree.
  static Tree from_links(std::vector<Link> links);

  std::size_t node_count() const noexcept { return parent_.size(); }
  std::size_t link_count() const noexcept { return parent_.size() - 1; }

  bool contains(NodeId k) const noexcept { return k < parent_.size(); }
  bool is_leaf(NodeId k) const;
  // Internal means neither the root nor a receiver.
  bool is_internal(NodeId k) const;

  NodeId parent(NodeId k) const;
  std::span<const NodeId> children(NodeId k) const;
  double link_rate(NodeId k) const;

  // All receivers (leaves), ascending.
  std::span<const NodeId> receivers() const noexcept { return receivers_; }
  // Receivers in the multicast subtree whose root link is k, ascending.
  std::span<const NodeId> receivers_of(NodeId k) const;

  // Internal nodes in ascending id order.
  std::span<const NodeId> internal_nodes() const noexcept { return internal_; }

  // Product of link rates along the path 0 -> k. Returns 1 for the root.
  double true_path_rate(NodeId k) const;

 private:
  Tree() = default;
  void check(NodeId k) const;

  std::vector<NodeId> parent_;
  std::vector<double> rate_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<std::vector<NodeId>> receivers_of_;
  std::vector<NodeId> receivers_;
  std::vector<NodeId> internal_;
};

// Parses the line-based topology format:
//   # comment
//   link <child> <parent> <rate>
// Throws ParseError (with line number) on syntax errors and InputError on
// validation failures.
Tree parse_topology(std::string_view text);

Tree load_topology(const std::filesystem::path& path);

// Inverse of parse_topology, one link per line.
std::string format_topology(const Tree& tree);

}  // namespace losstomo
