#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace numdiff {

// Malformed content in a text input. `line` is 1-based and counts the header.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error(msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Structurally wrong input (unexpected header, inconsistent column count).
class FormatError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation left the domain where the algorithm is defined
// (singular matrix, zero innovation variance, non-finite intermediate).
class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace numdiff
