#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace slp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed document. `where` is "line N" for syntax errors or a JSON
/// pointer for field errors.
class ParseError : public Error {
 public:
  ParseError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// A name that does not resolve (category, state, zone, object id, ...).
class ReferenceError : public Error {
 public:
  using Error::Error;
};

/// Several problems reported together.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Operation not allowed in the current state (illegal combine, closed
/// conflict, object held by the robot).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace slp
