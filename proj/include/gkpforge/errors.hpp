#pragma once

#include <stdexcept>
#include <string>

namespace gkpforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-schema configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Truncation (Fock cutoff or ladder window) lost more than the tolerance.
class UnconvergedError : public Error {
 public:
  using Error::Error;
};

/// A post-selection branch with (numerically) zero probability.
class ZeroProbabilityError : public Error {
 public:
  using Error::Error;
};

class ZeroNormError : public Error {
 public:
  using Error::Error;
};

}  // namespace gkpforge
