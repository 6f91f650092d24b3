#pragma once

#include <stdexcept>
#include <string>

namespace fairbalance {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Result magnitude not representable as a finite double.
class OverflowError : public std::overflow_error {
  public:
    using std::overflow_error::overflow_error;
};

/// Invalid scenario, sweep or override-file configuration.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Rebalancing action outside the configured action set.
class InvalidActionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Category index outside [1, M].
class IndexError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// Policies and scenario disagree on shape (M, sigma or action set).
class MismatchError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Failure probability requested for a category with zero departure attempts.
class UndefinedProbabilityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace fairbalance
