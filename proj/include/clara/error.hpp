#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace clara {

enum class ErrorCode {
  // knowledge base / input validation
  kParseError,
  kDuplicateId,
  kDanglingCategory,
  kDepthExceeded,
  kLayerOutOfRange,
  kUnknownIntent,
  kEmptyLog,
  kUncoveredIntent,
  kInsufficientData,
  kInvalidArgument,
  // retrieval
  kProviderUnavailable,
  kEmptyText,
  kDimensionMismatch,
  kZeroVector,
  kEmptyIndex,
  // prompting / llm
  kNoDemonstrations,
  kEmptySession,
  kBackendUnavailable,
  kBudgetExceeded,
  kMalformedResponse,
  kEmptyGeneration,
  // symbol tuning
  kTooShort,
  // classifier
  kShapeMismatch,
  kUnsimplifiedTaxonomy,
  kInvalidTarget,
  kEmptyDataset,
  // metrics
  kLengthMismatch,
  kEmpty,
  kNoRatings,
  kMissingGold,
  // pipeline
  kTooManyFailures,
  kIoError,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by bad input data rather than by the environment.
/// The CLI maps these to exit code 2.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed input record; `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace clara
