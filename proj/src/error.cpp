#include "mvreg/error.hpp"

namespace mvreg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::EmptyTarget: return "EmptyTarget";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::AngleAtBranchCut: return "AngleAtBranchCut";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DisconnectedAfterGating: return "DisconnectedAfterGating";
    case ErrorCode::UnreferencedVertex: return "UnreferencedVertex";
    case ErrorCode::DegenerateBoundingBox: return "DegenerateBoundingBox";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::NoClusters: return "NoClusters";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::UnknownConfigKey: return "UnknownConfigKey";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateConfiguration:
    case ErrorCode::AngleAtBranchCut:
    case ErrorCode::RankDeficient:
    case ErrorCode::DisconnectedAfterGating:
    case ErrorCode::DegenerateTriangle:
    case ErrorCode::NoClusters:
      return false;
    default:
      return true;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code) {}

}  // namespace mvreg
