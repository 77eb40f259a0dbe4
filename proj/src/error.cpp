#include "demoscope/error.hpp"

namespace demoscope {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
        case ErrorCode::NoBins: return "NoBins";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::UnknownCategory: return "UnknownCategory";
        case ErrorCode::MissingImage: return "MissingImage";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::Transport: return "Transport";
        case ErrorCode::Endpoint: return "Endpoint";
        case ErrorCode::Decode: return "Decode";
        case ErrorCode::MockMiss: return "MockMiss";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::UnresolvedPlaceholder: return "UnresolvedPlaceholder";
        case ErrorCode::MissingTemplate: return "MissingTemplate";
        case ErrorCode::MissingDescription: return "MissingDescription";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::Unresolvable: return "Unresolvable";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::DatasetMissing: return "DatasetMissing";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::HealthGuard: return "HealthGuard";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, int status)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), status_(status) {}

}  // namespace demoscope
