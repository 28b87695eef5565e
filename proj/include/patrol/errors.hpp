#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace patrol {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad files, unknown parameters, malformed scenarios.
class InputError : public Error {
 public:
  using Error::Error;
};

class GraphDisconnectedError : public Error {
 public:
  GraphDisconnectedError(const std::string& what, std::vector<std::vector<int>> components)
      : Error(what), components_(std::move(components)) {}

  const std::vector<std::vector<int>>& components() const { return components_; }

 private:
  std::vector<std::vector<int>> components_;
};

/// Raised when a simulation invariant (no teleportation, clock monotonicity...) breaks.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace patrol
