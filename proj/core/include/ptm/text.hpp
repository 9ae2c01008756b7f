#pragma once

// Minimal UTF-8 helpers shared by the tokenizer and the fingerprint router.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ptm::text {

struct Codepoint {
    char32_t value;
    std::size_t offset; // byte offset in the source
    std::size_t length; // encoded length in bytes
};

/// Decodes UTF-8; invalid bytes come back as U+FFFD spanning one byte.
std::vector<Codepoint> decode_utf8(std::string_view s);

/// Letters and digits (ASCII alnum, plus any non-ASCII codepoint that is not
/// in a punctuation/symbol/space block).
bool is_word_codepoint(char32_t c) noexcept;

/// The codepoint if `s` encodes exactly one.
std::optional<char32_t> single_codepoint(std::string_view s);

/// One non-word codepoint, e.g. "," or U+201C.
bool is_punctuation_token(std::string_view s);

std::string to_lower_ascii(std::string_view s);

} // namespace ptm::text
