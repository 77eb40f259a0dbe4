#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace demoscope {

enum class ErrorCode {
    InvalidArgument,
    Io,
    // core / datasets
    NoBins,
    EmptyDataset,
    UnknownCategory,
    MissingImage,
    TooLarge,
    // model client
    Transport,
    Endpoint,
    Decode,
    MockMiss,
    DimensionMismatch,
    // prompts
    UnresolvedPlaceholder,
    MissingTemplate,
    MissingDescription,
    EmptyInput,
    // remediation
    Unresolvable,
    ZeroVector,
    // metrics
    LengthMismatch,
    IndexOutOfRange,
    // harness
    ConfigInvalid,
    DatasetMissing,
    SchemaMismatch,
    HealthGuard,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, int status = 0);

    ErrorCode code() const noexcept { return code_; }
    /// HTTP status for Endpoint errors, 0 otherwise.
    int status() const noexcept { return status_; }

    /// MockMiss is reported to callers as a decode failure of the scripted endpoint.
    bool is_decode_class() const noexcept {
        return code_ == ErrorCode::Decode || code_ == ErrorCode::MockMiss;
    }

private:
    ErrorCode code_;
    int status_;
};

}  // namespace demoscope
