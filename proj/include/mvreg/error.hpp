#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvreg {

enum class ErrorCode {
  InvalidArgument,
  TooFewPoints,
  EmptyTarget,
  DegenerateConfiguration,
  AngleAtBranchCut,
  RankDeficient,
  ShapeMismatch,
  DisconnectedAfterGating,
  UnreferencedVertex,
  DegenerateBoundingBox,
  DegenerateTriangle,
  NoClusters,
  MalformedHeader,
  CountMismatch,
  UnsupportedFormat,
  UnknownConfigKey,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Whether an error stems from bad input (CLI exit code 1) rather than a
/// numerical failure during processing (exit code 2).
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mvreg
