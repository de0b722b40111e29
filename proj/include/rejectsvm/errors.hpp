#pragma once

#include <stdexcept>
#include <string>

namespace rsvm {

// Malformed input: dimension mismatches, bad relations, non-finite entries.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A scalar parameter outside its admissible range (d, tau, gamma, delta, r).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The simplex hit a pivot or tableau entry outside the representable range.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vertex enumeration refused because the problem is too large.
class OversizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Unreadable or malformed data/model/config files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unparseable command-line input such as an unknown dictionary spec.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rsvm
