#pragma once

#include <stdexcept>
#include <string>

namespace robustfolio {

// Error taxonomy shared by all modules. The CLI maps kinds to exit codes:
// domain/input problems -> 1, solver/numerical failures -> 2.
enum class ErrorKind {
    MissingPrice,
    UnevenLeafDepth,
    CyclicNodeGraph,
    DimensionMismatch,
    DomainError,
    SupportMismatch,
    ArbitrageDetected,
    EmptyCore,
    TooLarge,
    GridGuardExceeded,
    ParseError,
    InfeasibleStart,
    BracketNotConvex,
    LPNumericalFailure,
    IterationCapExceeded,
    SolverFailure,
    DualityGapExceeded,
};

const char* error_kind_name(ErrorKind kind);

// True for failures of the numerical machinery (exit code 2) as opposed to
// bad inputs (exit code 1).
bool is_solver_failure(ErrorKind kind);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
          kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace robustfolio
