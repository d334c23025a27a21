#ifndef ORDQR_ERRORS_HPP
#define ORDQR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ordqr {

/// Parameter outside the support of a distribution or formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input file is missing a required column.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a model invariant (bad category, empty file, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A chain produced a non-finite or inconsistent state.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ordqr

#endif  // ORDQR_ERRORS_HPP
