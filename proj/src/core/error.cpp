#include "core/error.hpp"

namespace finrag {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingValue: return "MissingValue";
    case ErrorCode::kMalformedNumber: return "MalformedNumber";
    case ErrorCode::kInvalidDate: return "InvalidDate";
    case ErrorCode::kAmbiguousDate: return "AmbiguousDate";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kUnreadableSource: return "UnreadableSource";
    case ErrorCode::kUnknownFormat: return "UnknownFormat";
    case ErrorCode::kPartialIngest: return "PartialIngest";
    case ErrorCode::kConflictingCompanyName: return "ConflictingCompanyName";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kEmbedderUnavailable: return "EmbedderUnavailable";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kCorruptIndex: return "CorruptIndex";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kUpstreamUnavailable: return "UpstreamUnavailable";
    case ErrorCode::kUpstreamRejected: return "UpstreamRejected";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kEmptyQuestion: return "EmptyQuestion";
    case ErrorCode::kInsufficientFacts: return "InsufficientFacts";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kUnknownGroup: return "UnknownGroup";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace finrag
