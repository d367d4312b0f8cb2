#pragma once

#include <stdexcept>
#include <string>

namespace rmtdetect {

// Input outside an operation's domain (empty spectrum, pole of f, bad shapes...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative method failed to meet its tolerance. The message carries the
// diagnostics (last iterate, residual, iteration count).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rmtdetect
