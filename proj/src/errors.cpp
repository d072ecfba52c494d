#include "robustfolio/errors.hpp"

namespace robustfolio {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MissingPrice: return "MissingPrice";
        case ErrorKind::UnevenLeafDepth: return "UnevenLeafDepth";
        case ErrorKind::CyclicNodeGraph: return "CyclicNodeGraph";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::SupportMismatch: return "SupportMismatch";
        case ErrorKind::ArbitrageDetected: return "ArbitrageDetected";
        case ErrorKind::EmptyCore: return "EmptyCore";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::GridGuardExceeded: return "GridGuardExceeded";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::InfeasibleStart: return "InfeasibleStart";
        case ErrorKind::BracketNotConvex: return "BracketNotConvex";
        case ErrorKind::LPNumericalFailure: return "LPNumericalFailure";
        case ErrorKind::IterationCapExceeded: return "IterationCapExceeded";
        case ErrorKind::SolverFailure: return "SolverFailure";
        case ErrorKind::DualityGapExceeded: return "DualityGapExceeded";
    }
    return "UnknownError";
}

bool is_solver_failure(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::LPNumericalFailure:
        case ErrorKind::IterationCapExceeded:
        case ErrorKind::SolverFailure:
        case ErrorKind::DualityGapExceeded:
            return true;
        default:
            return false;
    }
}

}  // namespace robustfolio
