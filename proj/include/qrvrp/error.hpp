#pragma once

#include <stdexcept>
#include <string>

namespace qrvrp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the 1-based line number (0 when not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Some customer cannot be served even by a dedicated route, or no feasible solution exists.
class InfeasibleProblem : public Error {
 public:
  using Error::Error;
};

/// A predictor cannot be built for the requested data setting.
class ModelUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace qrvrp
