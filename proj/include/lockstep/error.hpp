#pragma once

#include <stdexcept>
#include <string>

namespace lockstep {

/// Base of every exception thrown by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed a value that violates a documented precondition
/// (unknown player, duplicate player, non-finite timestamp, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A player's activity timestamps went backwards.
class OutOfOrder : public Error {
 public:
  OutOfOrder() : Error("Messages out of order") {}
  explicit OutOfOrder(const std::string& detail)
      : Error("Messages out of order: " + detail) {}
};

/// State was requested for a time before the commit horizon.
class PastQuery : public Error {
 public:
  PastQuery() : Error("Cannot look into the past") {}
};

}  // namespace lockstep
