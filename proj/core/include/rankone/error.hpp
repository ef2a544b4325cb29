#pragma once

#include <stdexcept>
#include <string>

namespace rankone {

/// Base class of every error raised by the library. The message is prefixed
/// with the module that raised it, e.g. "tower: depth 3 too shallow ...".
class Error : public std::runtime_error {
 public:
  Error(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what) {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The requested orbit or shift does not fit inside the stage-K tower.
class DepthTooShallow : public Error {
 public:
  using Error::Error;
};

/// Raised where a construction with rational discrete spectrum has no
/// finite eigenvalue order.
class OdometerCase : public Error {
 public:
  using Error::Error;
};

class NotBounded : public Error {
 public:
  using Error::Error;
};

/// A cyclic factor partition failed its column-offset check.
class ConsistencyFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace rankone
