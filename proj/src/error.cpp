#include "stackres/error.hpp"

namespace stackres {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateBlob: return "DuplicateBlob";
    case ErrorCode::InconsistentFlags: return "InconsistentFlags";
    case ErrorCode::CrossFileEdge: return "CrossFileEdge";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnknownFile: return "UnknownFile";
    case ErrorCode::FileSealed: return "FileSealed";
    case ErrorCode::CannotLiftPop: return "CannotLiftPop";
    case ErrorCode::NotAdjacent: return "NotAdjacent";
    case ErrorCode::InvalidJunction: return "InvalidJunction";
    case ErrorCode::StackMismatch: return "StackMismatch";
    case ErrorCode::StackExhausted: return "StackExhausted";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::NotRoot: return "NotRoot";
    case ErrorCode::NotReference: return "NotReference";
    case ErrorCode::NoMatch: return "NoMatch";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::Deserialize: return "Deserialize";
    case ErrorCode::StoreCorrupt: return "StoreCorrupt";
    case ErrorCode::ConflictingRecord: return "ConflictingRecord";
    case ErrorCode::StoreIo: return "StoreIo";
    case ErrorCode::NoReferenceAtPosition: return "NoReferenceAtPosition";
  }
  return "Unknown";
}

}  // namespace stackres
