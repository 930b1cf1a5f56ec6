#pragma once

#include <stdexcept>
#include <string>

namespace hiertect {

/// A caller broke an operation's precondition (overlapping clusters,
/// wrong vector length, ...).
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Input data or configuration failed validation.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A request exceeded a hard size limit (e.g. exhaustive enumeration).
class SizeError : public std::length_error {
public:
  using std::length_error::length_error;
};

} // namespace hiertect
