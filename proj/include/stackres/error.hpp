#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stackres {

enum class ErrorCode {
  DuplicateBlob,
  InconsistentFlags,
  CrossFileEdge,
  UnknownNode,
  UnknownFile,
  FileSealed,
  CannotLiftPop,
  NotAdjacent,
  InvalidJunction,
  StackMismatch,
  StackExhausted,
  CycleDetected,
  DepthExceeded,
  NotRoot,
  NotReference,
  NoMatch,
  SyntaxError,
  Deserialize,
  StoreCorrupt,
  ConflictingRecord,
  StoreIo,
  NoReferenceAtPosition,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI's exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stackres
