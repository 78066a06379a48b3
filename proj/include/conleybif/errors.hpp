#ifndef CONLEYBIF_ERRORS_HPP
#define CONLEYBIF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace conleybif {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent run configuration (CLI exit status 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A query left the finite noise window. Never extrapolated.
class WindowExhausted : public Error {
 public:
  using Error::Error;
};

/// Non-finite or unbounded trajectory.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A backward step found no preimage inside any monotone branch.
class NoPreimageError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// No verified filtration pair within the ring budget.
class FiltrationFailure : public Error {
 public:
  using Error::Error;
};

/// Box-level data cannot resolve the structure; subdivide and retry.
class RefinementError : public Error {
 public:
  using Error::Error;
};

}  // namespace conleybif

#endif  // CONLEYBIF_ERRORS_HPP
