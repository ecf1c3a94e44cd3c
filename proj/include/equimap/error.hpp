#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace equimap {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Malformed input text: syntax errors, unknown identifiers, bad numbers.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }
  const char* kind() const noexcept override { return "parse_error"; }

 private:
  std::size_t offset_;
};

/// A variable outside the declared alphabet of its context.
class AlphabetError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "alphabet_error"; }
};

/// Evaluation of an expression with an unbound free variable.
class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }
  const char* kind() const noexcept override { return "unbound_variable"; }

 private:
  std::string name_;
};

/// Base for all errors that signal a numerically degenerate situation.
class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric_error"; }
};

/// ln/sqrt/division/power evaluated outside its domain, or a non-finite result.
class DomainError : public NumericError {
 public:
  using NumericError::NumericError;
  const char* kind() const noexcept override { return "domain_error"; }
};

/// Total derivative would produce a jet symbol beyond second order.
class OrderOverflow : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "order_overflow"; }
};

/// Jet push-forward denominator vanishes (the point map folds there).
class DegenerateJacobian : public NumericError {
 public:
  explicit DegenerateJacobian(double denominator)
      : NumericError("degenerate jacobian: denominator " + std::to_string(denominator)),
        denominator_(denominator) {}
  double denominator() const noexcept { return denominator_; }
  const char* kind() const noexcept override { return "degenerate_jacobian"; }

 private:
  double denominator_;
};

/// A differential invariant requires a nonzero quantity that is zero here.
class DegenerateDenominator : public NumericError {
 public:
  using NumericError::NumericError;
  const char* kind() const noexcept override { return "degenerate_denominator"; }
};

/// Root finding could not locate a sign change.
class NoBracket : public NumericError {
 public:
  using NumericError::NumericError;
  const char* kind() const noexcept override { return "no_bracket"; }
};

/// The implicit-function condition fails: dG/du vanishes at the root.
class DerivativeVanishes : public NumericError {
 public:
  using NumericError::NumericError;
  const char* kind() const noexcept override { return "derivative_vanishes"; }
};

/// A generated equation is not linear in its highest derivatives.
class NonlinearityError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "nonlinearity_error"; }
};

/// Invalid construction of a domain object (generator spec, PDE, solution).
class ConstructionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "construction_error"; }
};

}  // namespace equimap
