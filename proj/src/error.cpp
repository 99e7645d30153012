#include "cbmr/error.hpp"

namespace cbmr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::MissingFrame: return "MissingFrame";
    case ErrorCode::WrongMediaType: return "WrongMediaType";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateMesh: return "DegenerateMesh";
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::IndexStale: return "IndexStale";
    case ErrorCode::NegativeComponent: return "NegativeComponent";
    case ErrorCode::ExtractionFailed: return "ExtractionFailed";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::InvalidQuery: return "InvalidQuery";
    case ErrorCode::UnsupportedTerm: return "UnsupportedTerm";
    case ErrorCode::UnknownSegment: return "UnknownSegment";
    case ErrorCode::MissingVectors: return "MissingVectors";
    case ErrorCode::SessionExpired: return "SessionExpired";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::InvalidRating: return "InvalidRating";
    case ErrorCode::EngineUnreachable: return "EngineUnreachable";
    case ErrorCode::MalformedScript: return "MalformedScript";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace cbmr
