#ifndef LEBESGUE_ERRORS_HPP
#define LEBESGUE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lebesgue {

/// Invalid distribution or experiment parameter (non-positive shape, d < 1, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a function (E1 at x <= 0, log of a non-positive coefficient, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A stated precondition of an operation does not hold.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// File could not be read or written; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lebesgue

#endif  // LEBESGUE_ERRORS_HPP
