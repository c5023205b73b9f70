#include "losstomo/stats.hpp"

#include <algorithm>
#include <bit>

#include "losstomo/error.hpp"

namespace losstomo {

namespace {

std::span<const NodeId> checked_children(const Tree& tree, NodeId parent) {
  if (!tree.is_internal(parent))
    throw InputError("node " + std::to_string(parent) + " is not an internal node");
  auto children = tree.children(parent);
  if (children.size() > kMaxMaskChildren)
    throw InputError("node " + std::to_string(parent) + " has more than 64 children");
  return children;
}

void check_mask(ChildMask mask, std::size_t child_count) {
  if (mask == 0) throw InputError("empty child group");
  if ((mask & ~full_mask(child_count)) != 0) throw InputError("child mask out of range");
}

}  // namespace

NodeIndicators project_indicators(const Tree& tree, const ObservationMatrix& obs) {
  check_receivers(tree, obs);
  const std::size_t n = obs.probe_count();
  std::vector<BitVector> y(tree.node_count(), BitVector(n));
  for (NodeId k : tree.receivers()) y[k] = obs.outcomes(k);
  // parent(i) < i, so a descending sweep finishes children before parents.
  for (NodeId i = static_cast<NodeId>(tree.node_count() - 1); i >= 1; --i) {
    if (tree.is_leaf(i)) continue;
    for (NodeId c : tree.children(i)) y[i] |= y[c];
  }
  y[kRoot] = y[1];
  return NodeIndicators(n, std::move(y));
}

ChildMask full_mask(std::size_t child_count) {
  return child_count >= 64 ? ~ChildMask{0} : (ChildMask{1} << child_count) - 1;
}

ChildMask mask_of(const Tree& tree, NodeId parent, std::span<const NodeId> group) {
  auto children = checked_children(tree, parent);
  ChildMask mask = 0;
  for (NodeId c : group) {
    auto it = std::lower_bound(children.begin(), children.end(), c);
    if (it == children.end() || *it != c)
      throw InputError("node " + std::to_string(c) + " is not a child of " +
                       std::to_string(parent));
    mask |= ChildMask{1} << (it - children.begin());
  }
  return mask;
}

std::vector<NodeId> members_of(const Tree& tree, NodeId parent, ChildMask mask) {
  auto children = checked_children(tree, parent);
  check_mask(mask, children.size());
  std::vector<NodeId> out;
  for (std::size_t p = 0; p < children.size(); ++p)
    if (mask >> p & 1U) out.push_back(children[p]);
  return out;
}

std::uint64_t IndicatorCounts::intersection_count(NodeId parent, ChildMask mask) const {
  auto children = checked_children(*tree_, parent);
  check_mask(mask, children.size());
  if (std::popcount(mask) == 1) return node_count(children[std::countr_zero(mask)]);
  const BitVector* first = nullptr;
  BitVector acc;
  for (std::size_t p = 0; p < children.size(); ++p) {
    if (!(mask >> p & 1U)) continue;
    if (!first) {
      first = &ind_->of(children[p]);
      acc = *first;
    } else {
      acc &= ind_->of(children[p]);
    }
  }
  return acc.count();
}

std::uint64_t IndicatorCounts::union_count(NodeId parent, ChildMask mask) const {
  auto children = checked_children(*tree_, parent);
  check_mask(mask, children.size());
  BitVector acc(ind_->probe_count());
  for (std::size_t p = 0; p < children.size(); ++p)
    if (mask >> p & 1U) acc |= ind_->of(children[p]);
  return acc.count();
}

SubsetCounts subset_counts(const Tree& tree, const NodeIndicators& ind, NodeId node,
                           std::size_t max_order) {
  auto children = checked_children(tree, node);
  if (max_order < 2 || max_order > children.size())
    throw InputError("max_order must lie in [2, " + std::to_string(children.size()) + "]");
  if (children.size() > 30) throw InputError("too many children to enumerate subsets");

  SubsetCounts out;
  out.node = node;
  out.max_order = max_order;
  IndicatorCounts counts(tree, ind);
  const ChildMask full = full_mask(children.size());
  for (ChildMask mask = 1; mask <= full; ++mask) {
    const auto order = static_cast<std::size_t>(std::popcount(mask));
    if (order >= 2 && order <= max_order) out.by_mask[mask] = counts.intersection_count(node, mask);
  }
  return out;
}

std::uint64_t group_union_count(const Tree& tree, const NodeIndicators& ind,
                                std::span<const NodeId> group) {
  if (group.empty()) throw InputError("empty child group");
  const NodeId parent = tree.parent(group.front());
  for (NodeId c : group)
    if (tree.parent(c) != parent) throw InputError("group members have different parents");
  return IndicatorCounts(tree, ind).union_count(parent, mask_of(tree, parent, group));
}

SiblingStats::SiblingStats(const Tree& tree, std::uint64_t probes)
    : tree_(&tree), probes_(probes), node_counts_(tree.node_count(), 0) {
  if (probes == 0) throw InputError("probe count must be positive");
}

SiblingStats SiblingStats::compute(const Tree& tree, const NodeIndicators& ind,
                                   std::size_t max_children) {
  SiblingStats stats(tree, ind.probe_count());
  for (NodeId i = 0; i < tree.node_count(); ++i) stats.node_counts_[i] = ind.count(i);
  for (NodeId k : tree.internal_nodes()) {
    const std::size_t d = tree.children(k).size();
    if (d > max_children) continue;
    stats.subsets_[k] = subset_counts(tree, ind, k, d).by_mask;
  }
  return stats;
}

void SiblingStats::set_node_count(NodeId i, std::uint64_t count) { node_counts_.at(i) = count; }

void SiblingStats::set_subset(NodeId parent, ChildMask mask, std::uint64_t count) {
  auto children = checked_children(*tree_, parent);
  check_mask(mask, children.size());
  if (std::popcount(mask) < 2) throw InputError("subset statistics need at least two children");
  subsets_[parent][mask] = count;
}

bool SiblingStats::has_all_subsets(NodeId parent) const {
  auto children = checked_children(*tree_, parent);
  auto it = subsets_.find(parent);
  const std::size_t expected = (std::size_t{1} << children.size()) - 1 - children.size();
  return expected == 0 || (it != subsets_.end() && it->second.size() == expected);
}

SiblingStats SiblingStats::scaled(std::uint64_t factor) const {
  if (factor == 0) throw InputError("scale factor must be positive");
  SiblingStats out = *this;
  out.probes_ *= factor;
  for (auto& c : out.node_counts_) c *= factor;
  for (auto& [parent, table] : out.subsets_)
    for (auto& [mask, c] : table) c *= factor;
  return out;
}

std::uint64_t SiblingStats::intersection_count(NodeId parent, ChildMask mask) const {
  auto children = checked_children(*tree_, parent);
  check_mask(mask, children.size());
  if (std::popcount(mask) == 1) return node_count(children[std::countr_zero(mask)]);
  auto table = subsets_.find(parent);
  if (table != subsets_.end()) {
    auto it = table->second.find(mask);
    if (it != table->second.end()) return it->second;
  }
  throw InputError("subset count not available for node " + std::to_string(parent));
}

std::uint64_t SiblingStats::union_count(NodeId parent, ChildMask mask) const {
  std::int64_t total = 0;
  // Every non-empty sub-mask of mask.
  for (ChildMask sub = mask; sub != 0; sub = (sub - 1) & mask) {
    const auto c = static_cast<std::int64_t>(intersection_count(parent, sub));
    total += (std::popcount(sub) % 2 == 1) ? c : -c;
  }
  if (total < 0) throw InputError("inconsistent subset counts");
  return static_cast<std::uint64_t>(total);
}

std::int64_t inclusion_exclusion_reconstruct(const SiblingStats& stats, const Tree& tree,
                                             NodeId node) {
  if (tree.is_leaf(node)) throw InputError("node " + std::to_string(node) + " is a leaf");
  const std::size_t d = tree.children(node).size();
  std::int64_t total = 0;
  const ChildMask full = full_mask(d);
  for (ChildMask mask = 1; mask <= full && mask != 0; ++mask) {
    const auto c = static_cast<std::int64_t>(stats.intersection_count(node, mask));
    total += (std::popcount(mask) % 2 == 1) ? c : -c;
    if (mask == full) break;
  }
  return total;
}

std::vector<IdentityCheck> check_sufficiency_identity(const SiblingStats& stats, const Tree& tree) {
  std::vector<IdentityCheck> out;
  for (NodeId k : tree.internal_nodes()) {
    IdentityCheck c;
    c.node = k;
    c.direct = static_cast<std::int64_t>(stats.node_count(k));
    if (stats.has_all_subsets(k)) {
      c.checked = true;
      c.reconstructed = inclusion_exclusion_reconstruct(stats, tree, k);
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace losstomo
