#include "ptm/text.hpp"

namespace ptm::text {

std::vector<Codepoint> decode_utf8(std::string_view s)
{
    std::vector<Codepoint> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        }
        bool ok = len > 0 && i + len <= s.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
            } else {
                cp = (cp << 6) | (b & 0x3F);
            }
        }
        if (!ok) {
            out.push_back({char32_t{0xFFFD}, i, 1});
            ++i;
            continue;
        }
        out.push_back({cp, i, len});
        i += len;
    }
    return out;
}

bool is_word_codepoint(char32_t c) noexcept
{
    if (c < 0x80) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    }
    if (c >= 0x80 && c <= 0xBF) return false;   // Latin-1 controls, symbols, NBSP
    if (c == 0xD7 || c == 0xF7) return false;   // multiplication / division signs
    if (c >= 0x2000 && c <= 0x206F) return false; // general punctuation and spaces
    if (c >= 0x20A0 && c <= 0x20CF) return false; // currency
    if (c >= 0x2190 && c <= 0x2BFF) return false; // arrows, math operators, shapes
    if (c >= 0x3000 && c <= 0x303F) return false; // CJK punctuation
    if (c >= 0xFE30 && c <= 0xFE4F) return false;
    if (c == 0xFEFF || c == 0xFFFD) return false;
    return true;
}

std::optional<char32_t> single_codepoint(std::string_view s)
{
    const auto cps = decode_utf8(s);
    if (cps.size() != 1) return std::nullopt;
    return cps.front().value;
}

bool is_punctuation_token(std::string_view s)
{
    const auto cp = single_codepoint(s);
    return cp.has_value() && !is_word_codepoint(*cp);
}

std::string to_lower_ascii(std::string_view s)
{
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

} // namespace ptm::text
