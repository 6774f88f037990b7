#pragma once

#include <stdexcept>
#include <string>

namespace gaborboost {

// Every failure raised by the library derives from Error. The CLI maps the
// concrete type onto its exit code (2 for parameter/capacity/format, 3 for
// algorithmic failures raised during boosting).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range index, invalid configuration, mismatched dimensions.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Not enough samples/pairs/images to satisfy a request.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Numeric data that violates a precondition (e.g. a negative weight).
class DataError : public Error {
 public:
  using Error::Error;
};

/// No admissible weak classifier remains (all excluded, or all rejected by
/// the mutual-information filter). Carries the 1-based round number.
class ExhaustionError : public Error {
 public:
  ExhaustionError(const std::string& what, int round)
      : Error(what), round_(round) {}
  int round() const noexcept { return round_; }

 private:
  int round_;
};

/// Sampled weight vector summed to zero.
class DegenerateWeightsError : public Error {
 public:
  using Error::Error;
};

}  // namespace gaborboost
