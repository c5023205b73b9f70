#include "losstomo/simulator.hpp"

#include <algorithm>

#include "losstomo/error.hpp"
#include "losstomo/rng.hpp"

namespace losstomo {

ObservationMatrix::ObservationMatrix(std::size_t probe_count, std::vector<NodeId> receiver_ids)
    : probe_count_(probe_count), receiver_ids_(std::move(receiver_ids)) {
  if (!std::is_sorted(receiver_ids_.begin(), receiver_ids_.end()) ||
      std::adjacent_find(receiver_ids_.begin(), receiver_ids_.end()) != receiver_ids_.end())
    throw InputError("receiver ids must be strictly ascending");
  outcomes_.assign(receiver_ids_.size(), BitVector(probe_count_));
}

const BitVector& ObservationMatrix::outcomes(NodeId id) const {
  auto it = std::lower_bound(receiver_ids_.begin(), receiver_ids_.end(), id);
  if (it == receiver_ids_.end() || *it != id)
    throw InputError("no observations for receiver " + std::to_string(id));
  return outcomes_[static_cast<std::size_t>(it - receiver_ids_.begin())];
}

ObservationMatrix simulate_probes(const Tree& tree, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InputError("probes must be >= 1");

  auto receivers = tree.receivers();
  ObservationMatrix obs(n, {receivers.begin(), receivers.end()});

  const std::size_t nodes = tree.node_count();
  std::vector<double> rate(nodes, 1.0);
  std::vector<NodeId> parent(nodes, kRoot);
  for (NodeId k = 1; k < nodes; ++k) {
    rate[k] = tree.link_rate(k);
    parent[k] = tree.parent(k);
  }
  // Column of each node in the matrix, or npos for internal nodes.
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> column(nodes, npos);
  for (std::size_t c = 0; c < receivers.size(); ++c) column[receivers[c]] = c;

  SplitMix64 rng(seed);
  std::vector<char> reached(nodes, 0);
  reached[kRoot] = 1;
  for (std::size_t j = 0; j < n; ++j) {
    for (NodeId k = 1; k < nodes; ++k) {
      const double u = rng.next_unit();
      reached[k] = reached[parent[k]] && u < rate[k];
      if (reached[k] && column[k] != npos) obs.column(column[k]).set(j);
    }
  }
  return obs;
}

void check_receivers(const Tree& tree, const ObservationMatrix& obs) {
  auto expected = tree.receivers();
  auto actual = obs.receiver_ids();
  if (!std::equal(expected.begin(), expected.end(), actual.begin(), actual.end()))
    throw InputError("observation receivers do not match the topology's receivers");
}

}  // namespace losstomo
