#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "losstomo/bitvec.hpp"
#include "losstomo/simulator.hpp"
#include "losstomo/topology.hpp"

namespace losstomo {

// Y_i^j = OR of X_k^j over receivers k in R(i), for every non-root node.
class NodeIndicators {
 public:
  NodeIndicators(std::size_t probe_count, std::vector<BitVector> per_node)
      : probe_count_(probe_count), per_node_(std::move(per_node)) {}

  std::size_t probe_count() const noexcept { return probe_count_; }
  std::size_t node_count() const noexcept { return per_node_.size(); }
  const BitVector& of(NodeId i) const { return per_node_.at(i); }
  // n_i(1)
  std::size_t count(NodeId i) const { return of(i).count(); }

 private:
  std::size_t probe_count_;
  std::vector<BitVector> per_node_;  // index 0 (root) mirrors node 1
};

// Throws InputError on a receiver mismatch.
NodeIndicators project_indicators(const Tree& tree, const ObservationMatrix& obs);

// Selects children of one parent: bit p stands for the p'th child in
// ascending id order. Limits mask-addressed statistics to 64 children.
using ChildMask = std::uint64_t;

inline constexpr std::size_t kMaxMaskChildren = 64;

ChildMask full_mask(std::size_t child_count);
ChildMask mask_of(const Tree& tree, NodeId parent, std::span<const NodeId> group);
std::vector<NodeId> members_of(const Tree& tree, NodeId parent, ChildMask mask);

// Read access to the sufficient statistics the estimators consume. All
// counts are exact integers; gamma_hat is a single integer division.
class CountSource {
 public:
  virtual ~CountSource() = default;

  virtual std::uint64_t probes() const = 0;
  // n_i(1)
  virtual std::uint64_t node_count(NodeId i) const = 0;
  // n_S(1): probes seen in every child subtree selected by mask.
  virtual std::uint64_t intersection_count(NodeId parent, ChildMask mask) const = 0;
  // Probes seen in at least one child subtree selected by mask.
  virtual std::uint64_t union_count(NodeId parent, ChildMask mask) const = 0;

  double gamma_hat(NodeId i) const {
    return static_cast<double>(node_count(i)) / static_cast<double>(probes());
  }
  double ratio(std::uint64_t count) const {
    return static_cast<double>(count) / static_cast<double>(probes());
  }
};

// Counts computed on demand from packed indicators (AND/OR + popcount).
class IndicatorCounts final : public CountSource {
 public:
  IndicatorCounts(const Tree& tree, const NodeIndicators& ind) : tree_(&tree), ind_(&ind) {}

  std::uint64_t probes() const override { return ind_->probe_count(); }
  std::uint64_t node_count(NodeId i) const override { return ind_->count(i); }
  std::uint64_t intersection_count(NodeId parent, ChildMask mask) const override;
  std::uint64_t union_count(NodeId parent, ChildMask mask) const override;

 private:
  const Tree* tree_;
  const NodeIndicators* ind_;
};

// n_S(1) for all subsets S of one node's children with 2 <= |S| <= max_order.
struct SubsetCounts {
  NodeId node = 0;
  std::size_t max_order = 0;
  std::map<ChildMask, std::uint64_t> by_mask;
};

// Throws InputError if node is a leaf or the root, or max_order is outside
// [2, |d_node|].
SubsetCounts subset_counts(const Tree& tree, const NodeIndicators& ind, NodeId node,
                           std::size_t max_order);

// Probes reaching at least one receiver below any member of group. Members
// must share a parent.
std::uint64_t group_union_count(const Tree& tree, const NodeIndicators& ind,
                                std::span<const NodeId> group);

// Materialized alternative statistics: n_i(1) for every node plus subset
// counts per internal node. Can also be filled by hand.
class SiblingStats final : public CountSource {
 public:
  SiblingStats(const Tree& tree, std::uint64_t probes);

  // Materializes every subset for nodes with at most max_children children;
  // larger nodes get node counts only.
  static SiblingStats compute(const Tree& tree, const NodeIndicators& ind,
                              std::size_t max_children = 16);

  void set_node_count(NodeId i, std::uint64_t count);
  void set_subset(NodeId parent, ChildMask mask, std::uint64_t count);
  bool has_all_subsets(NodeId parent) const;

  // Every count and the probe total multiplied by factor.
  SiblingStats scaled(std::uint64_t factor) const;

  std::uint64_t probes() const override { return probes_; }
  std::uint64_t node_count(NodeId i) const override { return node_counts_.at(i); }
  // Singleton masks read node counts; larger masks must have been stored.
  std::uint64_t intersection_count(NodeId parent, ChildMask mask) const override;
  // Inclusion-exclusion over the stored subsets of mask.
  std::uint64_t union_count(NodeId parent, ChildMask mask) const override;

 private:
  const Tree* tree_;
  std::uint64_t probes_;
  std::vector<std::uint64_t> node_counts_;
  std::map<NodeId, std::map<ChildMask, std::uint64_t>> subsets_;
};

// Alternating inclusion-exclusion over all non-empty child subsets of node.
// Equals the direct n_node(1) for any consistent statistics.
std::int64_t inclusion_exclusion_reconstruct(const SiblingStats& stats, const Tree& tree,
                                             NodeId node);

struct IdentityCheck {
  NodeId node = 0;
  bool checked = false;  // false when the node's subsets were not materialized
  std::int64_t direct = 0;
  std::int64_t reconstructed = 0;

  bool pass() const noexcept { return !checked || direct == reconstructed; }
};

// Compares inclusion_exclusion_reconstruct with n_k(1) at every internal node.
std::vector<IdentityCheck> check_sufficiency_identity(const SiblingStats& stats, const Tree& tree);

}  // namespace losstomo
