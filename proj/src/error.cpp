#include "clara/error.hpp"

namespace clara {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kDanglingCategory: return "DanglingCategory";
    case ErrorCode::kDepthExceeded: return "DepthExceeded";
    case ErrorCode::kLayerOutOfRange: return "LayerOutOfRange";
    case ErrorCode::kUnknownIntent: return "UnknownIntent";
    case ErrorCode::kEmptyLog: return "EmptyLog";
    case ErrorCode::kUncoveredIntent: return "UncoveredIntent";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kNoDemonstrations: return "NoDemonstrations";
    case ErrorCode::kEmptySession: return "EmptySession";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kEmptyGeneration: return "EmptyGeneration";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kUnsimplifiedTaxonomy: return "UnsimplifiedTaxonomy";
    case ErrorCode::kInvalidTarget: return "InvalidTarget";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmpty: return "Empty";
    case ErrorCode::kNoRatings: return "NoRatings";
    case ErrorCode::kMissingGold: return "MissingGold";
    case ErrorCode::kTooManyFailures: return "TooManyFailures";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kDuplicateId:
    case ErrorCode::kDanglingCategory:
    case ErrorCode::kDepthExceeded:
    case ErrorCode::kLayerOutOfRange:
    case ErrorCode::kUnknownIntent:
    case ErrorCode::kEmptyLog:
    case ErrorCode::kUncoveredIntent:
    case ErrorCode::kInsufficientData:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidTarget:
    case ErrorCode::kMissingGold:
    case ErrorCode::kLengthMismatch:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::kParseError,
            line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

}  // namespace clara
