#pragma once

#include <stdexcept>
#include <string>

namespace vgne {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A vector or matrix argument had the wrong size.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, long expected, long given)
      : Error(what + ": expected dimension " + std::to_string(expected) +
              ", got " + std::to_string(given)),
        expected_(expected),
        given_(given) {}

  long expected() const { return expected_; }
  long given() const { return given_; }

 private:
  long expected_;
  long given_;
};

/// The coupling constraint set is empty or has no strictly feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// An exact solver could not produce a certified solution.
class OracleError : public Error {
 public:
  using Error::Error;
};

/// Step-size / regularization / sampling schedules violate convergence conditions.
class ScheduleError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace vgne
