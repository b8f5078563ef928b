#pragma once

#include <stdexcept>
#include <string>

namespace wbary {

// Error categories map onto CLI exit codes (see tools/main.cpp):
// ParseError -> 3, SolverError -> 4, InvariantError -> 5.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvariantError : std::runtime_error {
  explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace wbary
