#pragma once

#include <stdexcept>
#include <string>

namespace persist {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or schema violations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Mathematically undefined requests (degenerate bodies, undefined means, unbounded programs).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A modelling hypothesis of the persistence theory is not met by the configuration.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

// A rare-event estimator lost every particle or had no survivors to estimate from.
class ExtinctionError : public Error {
 public:
  using Error::Error;
};

}  // namespace persist
