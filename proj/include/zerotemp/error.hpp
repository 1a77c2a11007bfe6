#ifndef ZEROTEMP_ERROR_HPP
#define ZEROTEMP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace zerotemp {

/// Bad argument to a constructor or operation (L = 0, negative radius, i out of range...).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input to the dynamics (wrong neighbour count, site outside region).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Engine request that is incompatible with the run mode (rejection-free while coupled).
class InvalidMode : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A geometric construction produced an inconsistent result. Always a bug.
class GeometryError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Not enough usable samples for an estimator.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace zerotemp

#endif  // ZEROTEMP_ERROR_HPP
