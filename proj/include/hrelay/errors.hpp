#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hrelay {

// Shape or dimension mismatch between arguments.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input is well-formed but degenerate (zero vector, empty relay set, ...).
class DegenerateInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An action asks a relay for more power than it can harvest.
class ConstraintViolation : public std::runtime_error {
 public:
  ConstraintViolation(int relay_id, const std::string& what)
      : std::runtime_error(what), relay_id_(relay_id) {}
  int relay_id() const noexcept { return relay_id_; }

 private:
  int relay_id_;
};

// Iterative solver failed; `trace` holds one line per outer iteration.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::vector<std::string> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<std::string>& trace() const noexcept { return trace_; }

 private:
  std::vector<std::string> trace_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hrelay
