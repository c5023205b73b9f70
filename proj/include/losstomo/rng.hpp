#pragma once

#include <cstdint>
#include <utility>

namespace losstomo {

// SplitMix64 (Steele, Lea & Flood). The state is the whole generator, so a
// stream is fully determined by its seed.
struct RngState {
  std::uint64_t state = 0;
};

// One SplitMix64 step: returns the advanced state and the 64-bit output.
constexpr std::pair<RngState, std::uint64_t> splitmix_next_u64(RngState s) noexcept {
  std::uint64_t z = (s.state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return {s, z ^ (z >> 31)};
}

// Top 53 bits of a 64-bit output as a double in [0, 1).
constexpr double to_unit(std::uint64_t z) noexcept {
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

constexpr std::pair<RngState, double> splitmix_next(RngState s) noexcept {
  auto [next, z] = splitmix_next_u64(s);
  return {next, to_unit(z)};
}

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : s_{seed} {}

  constexpr std::uint64_t next_u64() noexcept {
    auto [next, z] = splitmix_next_u64(s_);
    s_ = next;
    return z;
  }

  constexpr double next_unit() noexcept { return to_unit(next_u64()); }

  constexpr RngState state() const noexcept { return s_; }

  // UniformRandomBitGenerator interface.
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }
  constexpr result_type operator()() noexcept { return next_u64(); }

 private:
  RngState s_;
};

// Seed for replicate `index` of an experiment: first output of a SplitMix64
// stream started at master + index.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix_next_u64(RngState{master + index}).second;
}

}  // namespace losstomo
