#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace finrag {

// Mirrors finrag_status in include/finrag/finrag.h; values must stay in sync.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kMissingValue = 2,
  kMalformedNumber = 3,
  kInvalidDate = 4,
  kAmbiguousDate = 5,
  kMissingField = 6,
  kUnreadableSource = 7,
  kUnknownFormat = 8,
  kPartialIngest = 9,
  kConflictingCompanyName = 10,
  kEmptyText = 11,
  kEmbedderUnavailable = 12,
  kDimensionMismatch = 13,
  kDuplicateId = 14,
  kCorruptIndex = 15,
  kTruncatedFile = 16,
  kUpstreamUnavailable = 17,
  kUpstreamRejected = 18,
  kTimeout = 19,
  kEmptyQuestion = 20,
  kInsufficientFacts = 21,
  kLengthMismatch = 22,
  kUnknownGroup = 23,
  kConfig = 24,
  kIo = 25,
  kInternal = 26,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace finrag
