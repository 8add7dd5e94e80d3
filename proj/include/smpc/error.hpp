#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smpc {

enum class ErrorKind {
  Dimension,
  Parameter,
  DegenerateKernel,
  NumericalBreakdown,
  NonConvergence,
  Domain,
  SizeCap,
  UncontrollableHorizon,
  Invertibility,
  DegenerateRow,
  Numerical,
  Schema,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Six significant digits, for messages.
std::string format_number(double v);

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures caused by bad input rather than arithmetic.
  bool is_input_error() const noexcept {
    return kind_ == ErrorKind::Dimension || kind_ == ErrorKind::Parameter ||
           kind_ == ErrorKind::Domain || kind_ == ErrorKind::SizeCap ||
           kind_ == ErrorKind::Schema || kind_ == ErrorKind::Io;
  }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& m) : Error(ErrorKind::Dimension, m) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& m) : Error(ErrorKind::Parameter, m) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& m) : Error(ErrorKind::Domain, m) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& m, ErrorKind kind = ErrorKind::Numerical)
      : Error(kind, m) {}
};

/// Eigenvalue iteration hit its cap; carries the last spectral-radius estimate.
class EigenNonConvergence : public NumericalError {
 public:
  EigenNonConvergence(const std::string& m, double last_estimate)
      : NumericalError(m), last_estimate_(last_estimate) {}
  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

/// A Gibbs kernel entry exp(-C_ij / eps) underflowed to zero.
class DegenerateKernelError : public Error {
 public:
  DegenerateKernelError(std::size_t row, std::size_t col, double cost, double epsilon);
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }
  double cost() const noexcept { return cost_; }

 private:
  std::size_t row_;
  std::size_t col_;
  double cost_;
};

class SchemaError : public Error {
 public:
  SchemaError(const std::string& field, const std::string& message, std::size_t line = 0);
  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

}  // namespace smpc
