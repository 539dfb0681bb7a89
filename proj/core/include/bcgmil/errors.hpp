#ifndef BCGMIL_ERRORS_HPP_
#define BCGMIL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace bcgmil {

// Invalid argument values (cutoffs, counts, scales).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Vectors, atoms or models whose dimensions do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that cannot support the requested computation, e.g. no
// positive bags for training or no overlapping windows for evaluation.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed files and I/O failures.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bcgmil

#endif  // BCGMIL_ERRORS_HPP_
