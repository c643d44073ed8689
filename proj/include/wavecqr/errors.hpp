#pragma once

#include <stdexcept>
#include <string>

namespace wavecqr {

/// Shapes or lengths that do not agree (non-dyadic grid, mismatched n, ...).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter outside its admissible domain (tau not in (0,1), negative
/// threshold, non-positive penalty, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or non-finite input data, I/O and parse failures.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside a solver (singular system, ...).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wavecqr
