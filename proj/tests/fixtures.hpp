#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "losstomo/rng.hpp"
#include "losstomo/simulator.hpp"
#include "losstomo/topology.hpp"

namespace fixtures {

using losstomo::NodeId;

inline constexpr std::string_view kBinary = "link 1 0 0.95\nlink 2 1 0.9\nlink 3 1 0.9\n";
// Path link 0.9, three leaf links at 0.8.
inline constexpr std::string_view kTertiary =
    "link 1 0 0.9\nlink 2 1 0.8\nlink 3 1 0.8\nlink 4 1 0.8\n";
inline constexpr std::string_view kLosslessTertiary =
    "link 1 0 1.0\nlink 2 1 1.0\nlink 3 1 1.0\nlink 4 1 1.0\n";

// One string per probe, one character per receiver column ('1' = seen).
inline losstomo::ObservationMatrix matrix(const losstomo::Tree& tree,
                                          const std::vector<std::string>& rows) {
  auto receivers = tree.receivers();
  losstomo::ObservationMatrix obs(rows.size(), {receivers.begin(), receivers.end()});
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t c = 0; c < rows[j].size(); ++c)
      if (rows[j][c] == '1') obs.column(c).set(j);
  return obs;
}

// Tertiary dataset D1, n = 8: n2=6 n3=4 n4=4 n23=3 n24=3 n34=2 n234=1 (n1=7).
inline const std::vector<std::string> kD1Rows = {"111", "110", "110", "101",
                                                 "101", "011", "100", "000"};

// Binary dataset D2, n = 8: n2=4 n3=4 n23=3 (n1=5).
inline const std::vector<std::string> kD2Rows = {"11", "11", "11", "10",
                                                 "01", "00", "00", "00"};

// Random tree with at most `levels` levels of internal nodes below the root
// link and 2..max_children children per internal node, numbered top to
// bottom, left to right. Rates drawn from {0.70, 0.71, ..., 0.99}.
inline losstomo::Tree random_tree(losstomo::SplitMix64& rng, int levels, int max_children) {
  std::vector<losstomo::Link> links;
  auto rate = [&] { return 0.70 + 0.01 * static_cast<double>(rng.next_u64() % 30); };
  links.push_back({1, 0, rate()});
  std::vector<NodeId> frontier = {1};
  NodeId next = 2;
  for (int level = 0; level < levels && !frontier.empty(); ++level) {
    std::vector<NodeId> expand;
    for (NodeId v : frontier) {
      // The first level always branches; deeper nodes branch with prob 1/2.
      if (level == 0 || rng.next_u64() % 2 == 0) expand.push_back(v);
    }
    std::vector<NodeId> children_all;
    for (NodeId v : expand) {
      const int kids = 2 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_children - 1));
      for (int c = 0; c < kids; ++c) {
        links.push_back({next, v, rate()});
        children_all.push_back(next++);
      }
    }
    frontier = children_all;
  }
  std::sort(links.begin(), links.end(), [](auto& a, auto& b) { return a.child < b.child; });
  return losstomo::Tree::from_links(links);
}

// Fresh scratch directory per test process.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("losstomo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream(path) << text;
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixtures
