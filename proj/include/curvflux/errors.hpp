#pragma once

#include <stdexcept>
#include <string>

namespace curvflux {

/// Argument outside the mathematical domain of an operation (bad index,
/// k < 0, r outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A structural contract on an input was violated (non-symmetric operator,
/// non-conformal field, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Metric degenerates at a parameter point.
class SingularChartError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An experiment precondition does not hold (wrong weight tag, H_k not
/// constant, ...).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RootNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unresolvable experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace curvflux
