#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ptm {

enum class ErrorCode {
    invalid_argument,
    io_error,
    bad_magic,
    version_mismatch,
    truncated,
    checksum_mismatch,
    corrupt,
    synth_version_mismatch,
    unknown_phoneme,
    degenerate_signal,
    prior_unavailable,
    malformed_response,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace ptm
