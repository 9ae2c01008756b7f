#include "ptm/error.hpp"

namespace ptm {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::bad_magic: return "bad_magic";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::checksum_mismatch: return "checksum_mismatch";
    case ErrorCode::corrupt: return "corrupt";
    case ErrorCode::synth_version_mismatch: return "synth_version_mismatch";
    case ErrorCode::unknown_phoneme: return "unknown_phoneme";
    case ErrorCode::degenerate_signal: return "degenerate_signal";
    case ErrorCode::prior_unavailable: return "prior_unavailable";
    case ErrorCode::malformed_response: return "malformed_response";
    }
    return "unknown";
}

} // namespace ptm
