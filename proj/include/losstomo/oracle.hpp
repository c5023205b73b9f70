#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "losstomo/stats.hpp"
#include "losstomo/topology.hpp"

namespace losstomo::oracle {

// Brute-force references over the two-level view of one internal node: the
// probe reaches the node with probability a, then each child subtree c sees it
// independently with probability p_c.

// counts[pattern] for pattern masks over the children (bit p = p'th child).
using PatternCounts = std::vector<std::uint64_t>;

// P(pattern) = a * prod_c p_c^y_c (1 - p_c)^(1 - y_c) + (1 - a) [pattern == 0].
// Throws InputError for rates outside [0, 1].
double pattern_probability(double a, std::span<const double> child_rates, ChildMask pattern);

// Multinomial log-likelihood of the counts; 0 * log 0 is taken as 0.
double pattern_log_likelihood(std::span<const std::uint64_t> counts, double a,
                              std::span<const double> child_rates);

// Tallies the children's indicator patterns of `node` over all probes.
PatternCounts pattern_counts(const Tree& tree, const NodeIndicators& ind, NodeId node);

inline constexpr std::size_t kMaxGridChildren = 4;

struct GridMle {
  double a_star = 0.0;
  std::vector<double> child_rates;
  double log_likelihood = 0.0;
  bool degenerate = false;  // no probe observed: the maximum sits on a = 0
};

// Maximizes the full pattern likelihood over a on the grid
// {gamma_k + i * grid_step} U {1} and each p_c in [0, 1]. The p_c search runs
// to grid_step / 20 so that discretizing p does not move the argmax in a.
// Coarse-to-fine: each level searches a box around the previous level's best
// point exhaustively. Ties go to the smaller a.
// Throws InputError for more than four children or grid_step < 0.001.
GridMle grid_full_likelihood_mle(std::span<const std::uint64_t> counts, double grid_step);

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

// Scans H over [gamma_k, 1] at resolution `step` and returns every interval
// on which it changes sign (a grid point where H is exactly 0 is returned as
// a degenerate interval). Empty when gamma_k = 0 or H never changes sign.
std::vector<Bracket> sign_scan_root(double gamma_k, std::span<const double> child_gammas,
                                    double step);

}  // namespace losstomo::oracle
