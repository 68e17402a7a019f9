#pragma once

#include <stdexcept>
#include <string>

namespace goe {

// Base of every error thrown by the library. Subclasses name the failing
// contract so callers (and the CLI exit-code mapping) can tell them apart.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user-supplied parameter (shape parameters, rates, config values).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed CMDP (non-stochastic rows, size mismatch, bad pmf inputs).
class ModelError : public Error {
 public:
  using Error::Error;
};

// Budget cannot be met by any policy.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// State does not belong to the encoder's state space.
class EncodingError : public Error {
 public:
  using Error::Error;
};

// Empty log, or conditioning on an outcome that never occurred.
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Configuration document rejected (unknown key, wrong type, bad value).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace goe
