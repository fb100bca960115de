#pragma once

#include <stdexcept>
#include <string>

namespace rwsr {

// Bad argument or violated precondition. Maps to CLI exit code 1.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file contents (kernel files, pools, CSV, JSON).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Semantically invalid data, e.g. a rank set that is not a permutation.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable/unwritable file or undecodable image. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rwsr
