// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dmd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. log of x <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Family hyperparameters violate the family's validity constraints.
class InvalidParams : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

/// The target value lies outside the range reachable by the bracket.
class BracketError : public Error {
 public:
  enum class Side { Below, Above };

  BracketError(Side side, const std::string& what) : Error(what), side_(side) {}

  Side side() const noexcept { return side_; }

 private:
  Side side_;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

/// A single optimizer step could not be evaluated (inversion overflow, non-finite output).
class StepFailure : public Error {
 public:
  using Error::Error;
};

/// Every component of an MMD step clipped to zero.
class DegenerateState : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dmd
