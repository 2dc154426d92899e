#pragma once

#include <stdexcept>
#include <string>

namespace kcoddp {

// Parameter outside its documented domain (alpha <= 0, epsilon not in (0,1), ...).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Index or count past the available atoms.
class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Factorization failed even after jitter escalation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; the message carries the offending row.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidParameter(what);
}

}  // namespace kcoddp
