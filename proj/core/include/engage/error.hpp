#pragma once

#include <stdexcept>
#include <string>

namespace engage {

// Input data violated a schema or invariant (bad line, duplicate id, unknown
// taxonomy class, overlapping splits, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training or inference produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller passed arguments outside an operation's domain.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace engage
