#ifndef KLEST_TYPES_HPP
#define KLEST_TYPES_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace klest {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

// Error hierarchy. Everything thrown by the library derives from Error so
// callers can map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& what, long line)
      : IoError(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  /// Same error with `prefix` (typically a file name) prepended.
  ParseError(const std::string& prefix, const ParseError& inner)
      : IoError(prefix + inner.what()), line_(inner.line_) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Iterative method that stopped before reaching its tolerance.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double best_value, double achieved)
      : NumericalError(what), best_value_(best_value), achieved_(achieved) {}
  double best_value() const noexcept { return best_value_; }
  double achieved() const noexcept { return achieved_; }

 private:
  double best_value_;
  double achieved_;
};

class DegenerateRegression : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace klest

#endif  // KLEST_TYPES_HPP
