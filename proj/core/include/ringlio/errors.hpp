#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ringlio {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation (e.g. so3_log near pi).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// IMU step with dt <= 0 or dt above the gap guard.
class PropagationGapError : public Error {
 public:
  PropagationGapError(double t_from, double t_to, const std::string& what)
      : Error(what), t_from_(t_from), t_to_(t_to) {}

  double t_from() const { return t_from_; }
  double t_to() const { return t_to_; }

 private:
  double t_from_;
  double t_to_;
};

/// ICP could not find enough correspondences between source and target.
class NoOverlapError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value in a solve, cost or Jacobian.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyAssociationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ringlio
