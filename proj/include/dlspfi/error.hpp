#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dlspfi {

enum class ErrorCode {
  kDomain,          // argument outside the mathematical domain
  kInvalidArgument, // malformed or inconsistent input
  kShapeMismatch,   // dimensions or layouts disagree
  kInfeasible,      // residual bound cannot be met
  kNotConverged,    // iterative solver ran out of iterations
  kIo,              // file could not be opened / written
  kParse,           // file contents are malformed or truncated
  kVersion,         // file format version not supported
};

std::string_view to_string(ErrorCode code);

/// Library error. `what()` carries a human-readable message; `code()` is the
/// stable, machine-parsable category printed by the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the residual-constrained sparse coder when the bound is below the
/// best residual the dictionary can reach.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& message, double best_residual)
      : Error(ErrorCode::kInfeasible, message), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

class NotConvergedError : public Error {
 public:
  NotConvergedError(const std::string& message, double final_residual)
      : Error(ErrorCode::kNotConverged, message),
        final_residual_(final_residual) {}

  double final_residual() const noexcept { return final_residual_; }

 private:
  double final_residual_;
};

/// Short scientific rendering for messages, e.g. "3.2e-07".
inline std::string sci(double v) {
  std::ostringstream out;
  out.precision(2);
  out << std::scientific << v;
  return out.str();
}

}  // namespace dlspfi
