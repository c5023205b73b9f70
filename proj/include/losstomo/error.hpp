#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace losstomo {

// Bad input: malformed files, invalid topologies, mismatched data, bad config.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax error in a line-oriented input file. line() is 1-based.
class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace losstomo
