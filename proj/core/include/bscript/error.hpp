#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bscript {

/// Machine-readable failure categories shared by the library, service and CLI.
enum class ErrorCode {
    invalid_document,
    invalid_argument,
    out_of_range,
    overlap,
    unknown_id,
    revision_conflict,
    not_found,
    missing_model,
    missing_corpus,
    provider_unavailable,
    auth_failure,
    duplicate_name,
    single_class,
    dimension_mismatch,
    infeasible,
    io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace bscript
