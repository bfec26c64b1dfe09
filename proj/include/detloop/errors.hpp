#pragma once

#include <stdexcept>
#include <string>

namespace detloop {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// 2^(n+m) vertices or an NPA moment matrix would exceed the configured cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A count divided by the base rate exceeded 1.
class InvalidBaseRate : public Error {
 public:
  using Error::Error;
};

/// Joint probability above a marginal: no four-outcome table exists.
class InvalidBehavior : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// Closed-form efficiency threshold is undefined or above 1.
class NoThreshold : public Error {
 public:
  using Error::Error;
};

/// Even perfect detectors cannot reach the required value.
class NeverViolated : public Error {
 public:
  using Error::Error;
};

/// Observed behavior admits a classical model; nothing to certify.
class NotViolated : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace detloop
