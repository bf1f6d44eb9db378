#pragma once

#include <stdexcept>
#include <string>

namespace vclock {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical evaluation cannot meet its accuracy target.
class AccuracyLossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A simulation scheme was asked to run outside its hypotheses.
class SchemeMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Linear solve is (numerically) singular.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sampling grid or iteration budget exhausted.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or spec text.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A sampled path does not cover the range it is evaluated on.
class CoverageError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A numerical invariant that should hold did not.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vclock
