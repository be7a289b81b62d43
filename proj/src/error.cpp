#include "gridflex/error.hpp"

namespace gridflex {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::UnvalidatedNetwork: return "UnvalidatedNetwork";
    case ErrorCode::ZeroReactance: return "ZeroReactance";
    case ErrorCode::DisconnectedGrid: return "DisconnectedGrid";
    case ErrorCode::SingularSusceptance: return "SingularSusceptance";
    case ErrorCode::EmptyDsoNodeSet: return "EmptyDsoNodeSet";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IllFormedProgram: return "IllFormedProgram";
    case ErrorCode::TimeLimitExceeded: return "TimeLimitExceeded";
    case ErrorCode::InfeasibleFixing: return "InfeasibleFixing";
    case ErrorCode::InfeasibleMarket: return "InfeasibleMarket";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ZeroDispatch: return "ZeroDispatch";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::MissingScheme: return "MissingScheme";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace gridflex
