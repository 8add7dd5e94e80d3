#include "smpc/error.hpp"

#include <cstdio>

namespace smpc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::DegenerateKernel: return "degenerate-kernel";
    case ErrorKind::NumericalBreakdown: return "numerical-breakdown";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::SizeCap: return "size-cap";
    case ErrorKind::UncontrollableHorizon: return "uncontrollable-horizon";
    case ErrorKind::Invertibility: return "invertibility";
    case ErrorKind::DegenerateRow: return "degenerate-row";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

DegenerateKernelError::DegenerateKernelError(std::size_t row, std::size_t col, double cost,
                                             double epsilon)
    : Error(ErrorKind::DegenerateKernel,
            "Gibbs kernel entry (" + std::to_string(row) + ", " + std::to_string(col) +
                ") underflows: cost " + format_number(cost) + " with epsilon " +
                format_number(epsilon)),
      row_(row),
      col_(col),
      cost_(cost) {}

SchemaError::SchemaError(const std::string& field, const std::string& message, std::size_t line)
    : Error(ErrorKind::Schema,
            (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                (field.empty() ? message : "field '" + field + "': " + message)),
      field_(field),
      line_(line) {}

}  // namespace smpc
