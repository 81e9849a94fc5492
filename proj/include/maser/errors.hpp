#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace maser {

// Operands of incompatible shape (non-square, mismatched dims, wrong subsystem split).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input outside the mathematical domain of an operation (T <= 0, omega <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The integrated state left the physical set beyond the hard limits, or the
// field truncation monitor tripped.
class IntegrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A post-processing precondition (steady state, engine operation, record count) does not hold.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-fatal diagnostics collected by operations that can degrade gracefully.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace maser
