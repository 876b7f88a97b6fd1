#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vts {

enum class ErrorCode {
  // numerics
  ZeroMatrixPair,
  DegeneratePivot,
  SingularPencil,
  NoConvergence,
  LengthMismatch,
  ExhaustedResampling,
  DegenerateAbscissa,
  InvalidArgument,
  // ansatz
  BadParameterCount,
  IndexOutOfRange,
  // circuit
  NotNormalized,
  LayoutMismatch,
  ImpossibleOutcome,
  // loss
  KindMismatch,
  NoSuccessfulShots,
  InvalidShiftAngle,
  DegenerateMass,
  // optimizer
  NonPositiveDelta,
  MaxIterationsExceeded,
  // io
  IoFailure,
  ParseFailure,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code. The CLI maps codes to exit
/// statuses (validation 2, convergence 3, io 4).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroMatrixPair: return "ZeroMatrixPair";
    case ErrorCode::DegeneratePivot: return "DegeneratePivot";
    case ErrorCode::SingularPencil: return "SingularPencil";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ExhaustedResampling: return "ExhaustedResampling";
    case ErrorCode::DegenerateAbscissa: return "DegenerateAbscissa";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BadParameterCount: return "BadParameterCount";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::ImpossibleOutcome: return "ImpossibleOutcome";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::NoSuccessfulShots: return "NoSuccessfulShots";
    case ErrorCode::InvalidShiftAngle: return "InvalidShiftAngle";
    case ErrorCode::DegenerateMass: return "DegenerateMass";
    case ErrorCode::NonPositiveDelta: return "NonPositiveDelta";
    case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseFailure: return "ParseFailure";
  }
  return "Unknown";
}

}  // namespace vts
