#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridflex {

enum class ErrorCode {
  InvalidInput,
  UnvalidatedNetwork,
  ZeroReactance,
  DisconnectedGrid,
  SingularSusceptance,
  EmptyDsoNodeSet,
  DimensionMismatch,
  IllFormedProgram,
  TimeLimitExceeded,
  InfeasibleFixing,
  InfeasibleMarket,
  SolverFailure,
  InsufficientData,
  ZeroDispatch,
  UnknownNode,
  MissingScheme,
  EmptyGrid,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the study harness, the CLI) can classify it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gridflex
