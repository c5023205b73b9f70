#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "losstomo/bitvec.hpp"
#include "losstomo/topology.hpp"

namespace losstomo {

// Receiver observations: X_k^j = 1 iff probe j reached receiver k.
class ObservationMatrix {
 public:
  ObservationMatrix(std::size_t probe_count, std::vector<NodeId> receiver_ids);

  std::size_t probe_count() const noexcept { return probe_count_; }
  std::span<const NodeId> receiver_ids() const noexcept { return receiver_ids_; }

  // Outcome sequence of the column'th receiver (position in receiver_ids()).
  const BitVector& column(std::size_t column) const { return outcomes_.at(column); }
  BitVector& column(std::size_t column) { return outcomes_.at(column); }

  // Outcome sequence of receiver `id`; throws InputError if absent.
  const BitVector& outcomes(NodeId id) const;

  bool operator==(const ObservationMatrix&) const = default;

 private:
  std::size_t probe_count_;
  std::vector<NodeId> receiver_ids_;
  std::vector<BitVector> outcomes_;
};

// Draws n i.i.d. Bernoulli-loss probes down the tree. For each probe every
// link is visited in ascending child id and consumes exactly one variate,
// reached or not; a node is reached iff its parent was and u < rate.
ObservationMatrix simulate_probes(const Tree& tree, std::size_t n, std::uint64_t seed);

struct ObservationMeta {
  std::optional<std::uint64_t> seed;
  std::string topology;
};

// Observation CSV: optional "# seed=.. n=.. rng=splitmix64 topology=.." line,
// then "probe,<id>,..." and one 0/1 row per probe.
void write_observation_csv(std::ostream& out, const ObservationMatrix& obs,
                           const ObservationMeta& meta);
ObservationMatrix read_observation_csv(std::istream& in);

// Throws InputError unless the receiver columns equal the tree's receivers.
void check_receivers(const Tree& tree, const ObservationMatrix& obs);

}  // namespace losstomo
