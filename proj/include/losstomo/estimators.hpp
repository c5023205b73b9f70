#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "losstomo/stats.hpp"
#include "losstomo/topology.hpp"

namespace losstomo {

enum class Flag : std::uint8_t {
  ClampedHigh,
  ClampedLow,
  InconsistentData,
  NoData,
  DroppedZeroChildren,
  Undefined,
};

class FlagSet {
 public:
  FlagSet() = default;
  FlagSet(std::initializer_list<Flag> flags) {
    for (Flag f : flags) set(f);
  }

  void set(Flag f) noexcept { bits_ |= bit(f); }
  bool has(Flag f) const noexcept { return (bits_ & bit(f)) != 0; }
  bool empty() const noexcept { return bits_ == 0; }
  bool clamped() const noexcept { return has(Flag::ClampedHigh) || has(Flag::ClampedLow); }

  FlagSet& operator|=(FlagSet other) noexcept {
    bits_ |= other.bits_;
    return *this;
  }
  friend FlagSet operator|(FlagSet a, FlagSet b) noexcept { return a |= b; }
  bool operator==(const FlagSet&) const = default;

  // "CLAMPED_HIGH|INCONSISTENT_DATA", in declaration order; empty if none.
  std::string to_string() const;

 private:
  static constexpr std::uint8_t bit(Flag f) noexcept {
    return static_cast<std::uint8_t>(1U << static_cast<unsigned>(f));
  }
  std::uint8_t bits_ = 0;
};

// Estimated path pass rate at one node. An UNDEFINED estimate carries no value.
struct PathEstimate {
  std::optional<double> a_hat;
  FlagSet flags;

  bool defined() const noexcept { return a_hat.has_value(); }
};

// H(a) = 1 - gamma_k/a - prod_j (1 - gamma_j/a); its root in [gamma_k, 1] is
// the per-node maximum likelihood estimate. Throws std::invalid_argument for a <= 0.
double minc_poly_value(double a, double gamma_k, std::span<const double> child_gammas);

struct BisectionOptions {
  double tolerance = 1e-12;
  int max_iterations = 200;
};

// Root of H on [gamma_k, 1] by bisection.
//   - children with gamma_j = 0 drop out of the product (DROPPED_ZERO_CHILDREN);
//     with fewer than two left the result is gamma_k, INCONSISTENT_DATA
//   - gamma_k = 0: UNDEFINED, NO_DATA
//   - no sign change on the bracket: 1, CLAMPED_HIGH, INCONSISTENT_DATA
PathEstimate solve_minc_mle(double gamma_k, std::span<const double> child_gammas,
                            const BisectionOptions& options = {});

// Two-group closed form g1*g2/(g1 + g2 - gamma_k), clamped into [gamma_k, 1].
PathEstimate merged_mle(double gamma_k, double group1_gamma, double group2_gamma);

// (prod_j gamma_j / b_hat)^(1/(|d|-1)) with b_hat the empirical probability
// that every child subtree sees the probe. Throws for fewer than two children.
PathEstimate lln_explicit(double gamma_k, std::span<const double> child_gammas, double b_hat);

// Average over all r-subsets S of node's children of
// (prod_{c in S} gamma_c / (n_S/n))^(1/(r-1)), skipping subsets with n_S = 0.
// Throws InputError unless 2 <= r <= |d_node|.
PathEstimate order_r_explicit(const Tree& tree, const CountSource& counts, NodeId node,
                              std::size_t r);

enum class EstimatorKind { MincMle, MergedMle, Lln, OrderR };

// Explicit two-part partition of one node's children.
struct MergeSplit {
  std::vector<NodeId> group1;
  std::vector<NodeId> group2;

  // "2,3|4"
  static MergeSplit parse(std::string_view text);
  std::string label() const;  // "2+3|4", comma-free for CSV fields
};

struct EstimatorId {
  EstimatorKind kind = EstimatorKind::MincMle;
  std::size_t order = 0;            // OrderR only
  std::optional<MergeSplit> split;  // MergedMle only; default split elsewhere

  // "minc-mle", "merged-mle", "lln", "order-r:<r>". Throws InputError.
  static EstimatorId parse(std::string_view text);
  std::string label() const;

  bool operator==(const EstimatorId& other) const { return label() == other.label(); }
};

// Throws InputError unless the split partitions the children of one node.
// Returns that node.
NodeId validate_split(const Tree& tree, const MergeSplit& split);

// Default partition: first ceil(d/2) children (ascending id) versus the rest.
ChildMask default_split_mask(std::size_t child_count);

// Applies one estimator at internal node k. Inapplicable estimators (order-r
// with r > |d_k|) yield UNDEFINED rather than an exception.
PathEstimate estimate_node(const Tree& tree, const CountSource& counts, NodeId k,
                           const EstimatorId& estimator);

struct NodeEstimate {
  NodeId node = 0;
  double gamma_hat = 0.0;
  PathEstimate path;
  std::optional<double> alpha_hat;  // link pass rate of link `node`
  FlagSet link_flags;

  std::optional<double> loss_hat() const {
    return alpha_hat ? std::optional<double>(1.0 - *alpha_hat) : std::nullopt;
  }
};

struct EstimateSet {
  EstimatorId estimator;
  std::vector<NodeEstimate> nodes;  // nodes[k - 1] is node k

  const NodeEstimate& at(NodeId k) const { return nodes.at(k - 1); }
};

// Path estimates at every internal node; receivers take a_hat = gamma_hat.
// Link rates are alpha_i = A_i / A_parent(i) (alpha_1 = A_1). alpha > 1 is
// flagged CLAMPED_HIGH and capped at 1 only when clamp_links is set.
EstimateSet estimate_all_paths(const Tree& tree, const CountSource& counts,
                               const EstimatorId& estimator, bool clamp_links = false);

struct SplitEstimate {
  NodeId node = 0;
  MergeSplit split;
  PathEstimate path;
};

// merged-mle under every two-part partition of each internal node's children
// (group1 always holds the smallest child). Nodes with more than max_children
// children are skipped.
std::vector<SplitEstimate> merged_mle_all_splits(const Tree& tree, const CountSource& counts,
                                                 std::size_t max_children = 16);

// Estimates CSV: estimator,node,gamma_hat,a_hat,alpha_hat,loss_hat,flags
void write_estimates_csv(std::ostream& out, const EstimateSet& set);
void write_split_estimates_csv(std::ostream& out, const CountSource& counts,
                               std::span<const SplitEstimate> rows);

}  // namespace losstomo
