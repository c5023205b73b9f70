#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace losstomo {

// Renders with 12 significant digits ("%.12g"); the fixed float format of
// every CSV this library writes.
std::string format_real(double value);
std::string format_real(const std::optional<double>& value);  // empty if nullopt

std::vector<std::string_view> split(std::string_view text, char sep);

}  // namespace losstomo
