#include "losstomo/estimators.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "losstomo/csv.hpp"
#include "losstomo/error.hpp"

namespace losstomo {

namespace {

constexpr std::string_view kFlagNames[] = {
    "CLAMPED_HIGH", "CLAMPED_LOW", "INCONSISTENT_DATA", "NO_DATA", "DROPPED_ZERO_CHILDREN",
    "UNDEFINED",
};

PathEstimate undefined_no_data() { return {std::nullopt, {Flag::Undefined, Flag::NoData}}; }

// Clamps into [gamma_k, 1], recording which side was hit.
PathEstimate clamp_to_range(double value, double gamma_k, FlagSet flags) {
  if (value > 1.0) {
    flags.set(Flag::ClampedHigh);
    return {1.0, flags};
  }
  if (value < gamma_k) {
    flags.set(Flag::ClampedLow);
    return {gamma_k, flags};
  }
  return {value, flags};
}

// (prod / b)^(1/(r-1)); shared by lln and order-r so that the r = |d| member
// of the family reproduces lln bit for bit.
double ratio_root(double prod, double b, std::size_t r) {
  return std::pow(prod / b, 1.0 / static_cast<double>(r - 1));
}

std::vector<double> child_gammas(const Tree& tree, const CountSource& counts, NodeId k) {
  std::vector<double> out;
  for (NodeId c : tree.children(k)) out.push_back(counts.gamma_hat(c));
  return out;
}

std::vector<NodeId> parse_id_list(std::string_view text) {
  std::vector<NodeId> ids;
  for (auto token : split(text, ',')) {
    NodeId id = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), id);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size())
      throw InputError("bad node id '" + std::string(token) + "' in split");
    ids.push_back(id);
  }
  return ids;
}

std::string join_ids(const std::vector<NodeId>& ids, char sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(ids[i]);
  }
  return out;
}

}  // namespace

std::string FlagSet::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < std::size(kFlagNames); ++i) {
    if (!has(static_cast<Flag>(i))) continue;
    if (!out.empty()) out += '|';
    out += kFlagNames[i];
  }
  return out;
}

double minc_poly_value(double a, double gamma_k, std::span<const double> child_gammas) {
  if (!(a > 0.0)) throw std::invalid_argument("candidate rate must be positive");
  double prod = 1.0;
  for (double g : child_gammas) prod *= 1.0 - g / a;
  return 1.0 - gamma_k / a - prod;
}

PathEstimate solve_minc_mle(double gamma_k, std::span<const double> child_gammas,
                            const BisectionOptions& options) {
  if (!(gamma_k > 0.0)) return undefined_no_data();

  FlagSet flags;
  std::vector<double> gammas;
  for (double g : child_gammas) {
    if (g > 0.0)
      gammas.push_back(g);
    else
      flags.set(Flag::DroppedZeroChildren);
  }
  if (gammas.size() < 2) {
    flags.set(Flag::InconsistentData);
    return {gamma_k, flags};
  }

  auto h = [&](double a) { return minc_poly_value(a, gamma_k, gammas); };
  double lo = gamma_k;
  double hi = 1.0;
  const double h_lo = h(lo);
  const double h_hi = h(hi);
  if (h_lo > 0.0 || h_hi < 0.0) {
    flags.set(Flag::ClampedHigh);
    flags.set(Flag::InconsistentData);
    return {1.0, flags};
  }
  if (h_lo == 0.0) return {lo, flags};
  if (h_hi == 0.0) return {hi, flags};

  // Invariant: h(lo) < 0 < h(hi).
  double f_lo = h_lo, f_hi = h_hi;
  for (int i = 0; i < options.max_iterations && hi - lo > options.tolerance; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double h_mid = h(mid);
    if (h_mid == 0.0) return {mid, flags};
    if (h_mid < 0.0) {
      lo = mid;
      f_lo = h_mid;
    } else {
      hi = mid;
      f_hi = h_mid;
    }
  }
  // Linear interpolation inside the final bracket; cheap, and it keeps the
  // twelfth printed digit honest.
  const double a = lo - f_lo * (hi - lo) / (f_hi - f_lo);
  return {std::clamp(a, lo, hi), flags};
}

PathEstimate merged_mle(double gamma_k, double group1_gamma, double group2_gamma) {
  if (!(gamma_k > 0.0)) return undefined_no_data();
  const double denominator = group1_gamma + group2_gamma - gamma_k;
  if (!(denominator > 0.0)) return {1.0, {Flag::ClampedHigh, Flag::InconsistentData}};
  return clamp_to_range(group1_gamma * group2_gamma / denominator, gamma_k, {});
}

PathEstimate lln_explicit(double gamma_k, std::span<const double> child_gammas, double b_hat) {
  if (child_gammas.size() < 2) throw std::invalid_argument("lln needs at least two children");
  if (!(b_hat > 0.0)) return undefined_no_data();
  double prod = 1.0;
  for (double g : child_gammas) prod *= g;
  return clamp_to_range(ratio_root(prod, b_hat, child_gammas.size()), gamma_k, {});
}

PathEstimate order_r_explicit(const Tree& tree, const CountSource& counts, NodeId node,
                              std::size_t r) {
  if (!tree.is_internal(node)) throw InputError("order-r needs an internal node");
  const std::size_t d = tree.children(node).size();
  if (r < 2 || r > d)
    throw InputError("order r=" + std::to_string(r) + " outside [2, " + std::to_string(d) + "]");

  const double gamma_k = counts.gamma_hat(node);
  const auto gammas = child_gammas(tree, counts, node);

  FlagSet flags;
  double sum = 0.0;
  std::size_t used = 0;
  // Lexicographic r-combinations of child positions.
  std::vector<std::size_t> pick(r);
  for (std::size_t i = 0; i < r; ++i) pick[i] = i;
  while (true) {
    ChildMask mask = 0;
    for (std::size_t p : pick) mask |= ChildMask{1} << p;
    const std::uint64_t n_s = counts.intersection_count(node, mask);
    if (n_s == 0) {
      flags.set(Flag::DroppedZeroChildren);
    } else {
      double prod = 1.0;
      for (std::size_t p : pick) prod *= gammas[p];
      sum += ratio_root(prod, counts.ratio(n_s), r);
      ++used;
    }

    std::size_t i = r;
    while (i > 0 && pick[i - 1] == d - r + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < r; ++j) pick[j] = pick[j - 1] + 1;
  }

  if (used == 0) {
    flags.set(Flag::Undefined);
    flags.set(Flag::NoData);
    return {std::nullopt, flags};
  }
  return clamp_to_range(sum / static_cast<double>(used), gamma_k, flags);
}

MergeSplit MergeSplit::parse(std::string_view text) {
  auto parts = split(text, '|');
  if (parts.size() != 2) throw InputError("split must look like 'a,b|c,d'");
  MergeSplit s{parse_id_list(parts[0]), parse_id_list(parts[1])};
  std::sort(s.group1.begin(), s.group1.end());
  std::sort(s.group2.begin(), s.group2.end());
  return s;
}

std::string MergeSplit::label() const { return join_ids(group1, '+') + "|" + join_ids(group2, '+'); }

EstimatorId EstimatorId::parse(std::string_view text) {
  if (text == "minc-mle") return {EstimatorKind::MincMle, 0, std::nullopt};
  if (text == "merged-mle") return {EstimatorKind::MergedMle, 0, std::nullopt};
  if (text == "lln") return {EstimatorKind::Lln, 0, std::nullopt};
  if (text.starts_with("order-r:")) {
    auto digits = text.substr(8);
    std::size_t r = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), r);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || r < 2)
      throw InputError("order-r needs an integer order >= 2");
    return {EstimatorKind::OrderR, r, std::nullopt};
  }
  throw InputError("unknown estimator '" + std::string(text) + "'");
}

std::string EstimatorId::label() const {
  switch (kind) {
    case EstimatorKind::MincMle:
      return "minc-mle";
    case EstimatorKind::MergedMle:
      return split ? "merged-mle:" + split->label() : "merged-mle";
    case EstimatorKind::Lln:
      return "lln";
    case EstimatorKind::OrderR:
      return "order-r:" + std::to_string(order);
  }
  return {};
}

NodeId validate_split(const Tree& tree, const MergeSplit& split) {
  if (split.group1.empty() || split.group2.empty()) throw InputError("split groups must be non-empty");
  for (NodeId c : split.group1)
    if (!tree.contains(c) || c == kRoot) throw InputError("unknown node " + std::to_string(c));
  const NodeId parent = tree.parent(split.group1.front());
  std::vector<NodeId> all = split.group1;
  all.insert(all.end(), split.group2.begin(), split.group2.end());
  std::sort(all.begin(), all.end());
  auto children = tree.children(parent);
  if (!std::equal(all.begin(), all.end(), children.begin(), children.end()))
    throw InputError("split must partition the children of node " + std::to_string(parent));
  return parent;
}

ChildMask default_split_mask(std::size_t child_count) {
  return full_mask((child_count + 1) / 2);
}

PathEstimate estimate_node(const Tree& tree, const CountSource& counts, NodeId k,
                           const EstimatorId& estimator) {
  if (!tree.is_internal(k)) throw InputError("node " + std::to_string(k) + " is not internal");
  const std::size_t d = tree.children(k).size();
  const double gamma_k = counts.gamma_hat(k);

  switch (estimator.kind) {
    case EstimatorKind::MincMle:
      return solve_minc_mle(gamma_k, child_gammas(tree, counts, k));

    case EstimatorKind::MergedMle: {
      ChildMask mask = default_split_mask(d);
      if (estimator.split && tree.parent(estimator.split->group1.front()) == k)
        mask = mask_of(tree, k, estimator.split->group1);
      const ChildMask rest = full_mask(d) & ~mask;
      return merged_mle(gamma_k, counts.ratio(counts.union_count(k, mask)),
                        counts.ratio(counts.union_count(k, rest)));
    }

    case EstimatorKind::Lln: {
      const double b_hat = counts.ratio(counts.intersection_count(k, full_mask(d)));
      return lln_explicit(gamma_k, child_gammas(tree, counts, k), b_hat);
    }

    case EstimatorKind::OrderR:
      if (estimator.order > d) return {std::nullopt, {Flag::Undefined}};
      return order_r_explicit(tree, counts, k, estimator.order);
  }
  return {std::nullopt, {Flag::Undefined}};
}

EstimateSet estimate_all_paths(const Tree& tree, const CountSource& counts,
                               const EstimatorId& estimator, bool clamp_links) {
  if (estimator.split) validate_split(tree, *estimator.split);

  EstimateSet set{estimator, {}};
  set.nodes.resize(tree.link_count());
  for (NodeId k = 1; k < tree.node_count(); ++k) {
    NodeEstimate& e = set.nodes[k - 1];
    e.node = k;
    e.gamma_hat = counts.gamma_hat(k);
    if (tree.is_leaf(k))
      e.path = {e.gamma_hat, {}};  // a receiver's path rate is observed directly
    else
      e.path = estimate_node(tree, counts, k, estimator);
  }

  for (NodeEstimate& e : set.nodes) {
    const NodeId parent = tree.parent(e.node);
    const std::optional<double> upper =
        parent == kRoot ? std::optional<double>(1.0) : set.at(parent).path.a_hat;
    if (!e.path.a_hat || !upper || !(*upper > 0.0)) {
      e.link_flags.set(Flag::Undefined);
      continue;
    }
    double alpha = *e.path.a_hat / *upper;
    if (alpha > 1.0) {
      e.link_flags.set(Flag::ClampedHigh);
      if (clamp_links) alpha = 1.0;
    }
    e.alpha_hat = alpha;
  }
  return set;
}

std::vector<SplitEstimate> merged_mle_all_splits(const Tree& tree, const CountSource& counts,
                                                 std::size_t max_children) {
  std::vector<SplitEstimate> out;
  for (NodeId k : tree.internal_nodes()) {
    const std::size_t d = tree.children(k).size();
    if (d > max_children) continue;
    const ChildMask full = full_mask(d);
    const double gamma_k = counts.gamma_hat(k);
    for (ChildMask mask = 1; mask < full; mask += 2) {
      const ChildMask rest = full & ~mask;
      SplitEstimate row;
      row.node = k;
      row.split = {members_of(tree, k, mask), members_of(tree, k, rest)};
      row.path = merged_mle(gamma_k, counts.ratio(counts.union_count(k, mask)),
                            counts.ratio(counts.union_count(k, rest)));
      out.push_back(std::move(row));
    }
  }
  return out;
}

namespace {
constexpr std::string_view kEstimatesHeader =
    "estimator,node,gamma_hat,a_hat,alpha_hat,loss_hat,flags\n";
}

void write_estimates_csv(std::ostream& out, const EstimateSet& set) {
  out << kEstimatesHeader;
  const std::string label = set.estimator.label();
  for (const NodeEstimate& e : set.nodes) {
    out << label << ',' << e.node << ',' << format_real(e.gamma_hat) << ','
        << format_real(e.path.a_hat) << ',' << format_real(e.alpha_hat) << ','
        << format_real(e.loss_hat()) << ',' << (e.path.flags | e.link_flags).to_string() << '\n';
  }
}

void write_split_estimates_csv(std::ostream& out, const CountSource& counts,
                               std::span<const SplitEstimate> rows) {
  out << kEstimatesHeader;
  for (const SplitEstimate& row : rows) {
    out << "merged-mle:" << row.split.label() << ',' << row.node << ','
        << format_real(counts.gamma_hat(row.node)) << ',' << format_real(row.path.a_hat)
        << ",,," << row.path.flags.to_string() << '\n';
  }
}

}  // namespace losstomo
