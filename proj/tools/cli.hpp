#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace losstomo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

// Runs one invocation. args excludes the program name, e.g.
// {"simulate", "--topology", "t.txt", "--probes", "100"}.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace losstomo::cli
