#pragma once

#include <stdexcept>
#include <string>

namespace hbpolyak {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong dimensions, negative eigenvalues, bad spec fields.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Base class for failures that happen while iterating a solver.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// f(x) dropped below the supplied optimal value, so the supplied f* is wrong.
class InvalidFStarError : public SolverError {
 public:
  InvalidFStarError(double f_value, double f_star)
      : SolverError("invalid f*: f(x) = " + std::to_string(f_value) +
                    " is below the supplied optimal value " +
                    std::to_string(f_star)),
        f_value_(f_value),
        f_star_(f_star) {}

  double f_value() const noexcept { return f_value_; }
  double f_star() const noexcept { return f_star_; }

 private:
  double f_value_;
  double f_star_;
};

/// The momentum update divides by a quantity that vanished.
class DegenerateMomentumError : public SolverError {
 public:
  DegenerateMomentumError(const std::string& what, double numerator,
                          double denominator, double reference)
      : SolverError(what + " (numerator " + std::to_string(numerator) +
                    ", denominator " + std::to_string(denominator) +
                    ", reference scale " + std::to_string(reference) + ")"),
        numerator_(numerator),
        denominator_(denominator),
        reference_(reference) {}

  double numerator() const noexcept { return numerator_; }
  double denominator() const noexcept { return denominator_; }
  double reference() const noexcept { return reference_; }

 private:
  double numerator_;
  double denominator_;
  double reference_;
};

/// Conjugate gradient hit a direction of non-positive curvature.
class BreakdownError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Q is not positive at an eigenvalue where it has to be.
class InvalidQError : public Error {
 public:
  using Error::Error;
};

class InvalidTrajectoryError : public Error {
 public:
  using Error::Error;
};

/// The spectral measure has no mass left for the requested polynomial degree.
class MeasureExhausted : public Error {
 public:
  using Error::Error;
};

}  // namespace hbpolyak
