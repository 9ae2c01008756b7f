#pragma once

// Word -> phonemes -> waveform -> 16-band spectral fingerprint.
//
// Everything here is a pure function of its inputs: the synthesizer uses a
// counter-based noise generator and table-driven oscillators, so a given
// pronunciation yields the same samples (and the same fingerprint bits) on
// every run.

#include "ptm/manifold.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ptm::phonetics {

/// Bumped whenever any constant below (or the formant table) changes. Traces
/// and vocabulary indexes record it so stale pairs are rejected.
inline constexpr std::uint32_t kSynthVersion = 1;

inline constexpr double kSampleRate = 16000.0;
inline constexpr std::size_t kSamplesPerPhoneme = 1280; // 80 ms
inline constexpr std::size_t kMinFingerprintSamples = 256;
inline constexpr double kBandLowHz = 50.0;
inline constexpr double kBandHighHz = 8000.0;

// clang-format off
enum class Phoneme : std::uint8_t {
    AA, AE, AH, AO, AW, AY, B, CH, D, DH, EH, ER, EY, F, G, HH, IH, IY, JH, K,
    L, M, N, NG, OW, OY, P, R, S, SH, T, TH, UH, UW, V, W, Y, Z, ZH,
};
// clang-format on
inline constexpr std::size_t kPhonemeCount = 39;

enum class PhonemeClass : std::uint8_t { vowel, stop, affricate, fricative, aspirate, nasal, liquid, glide };

using PhonemeSeq = std::vector<Phoneme>;
using Waveform = std::vector<float>;
using Fingerprint = ForceVector;

std::string_view symbol(Phoneme p) noexcept;
PhonemeClass phoneme_class(Phoneme p) noexcept;

/// Accepts upper or lower case with an optional trailing stress digit.
std::optional<Phoneme> parse_phoneme(std::string_view text);

/// Whitespace-separated symbols; throws Error(unknown_phoneme).
PhonemeSeq parse_phonemes(std::string_view text);

class PronunciationTable {
public:
    /// Keeps the first pronunciation seen for a word. Returns false on a
    /// duplicate.
    bool insert(std::string word, PhonemeSeq phonemes);

    const PhonemeSeq* find(std::string_view lowercase_word) const;
    bool contains(std::string_view lowercase_word) const { return find(lowercase_word) != nullptr; }

    std::size_t size() const noexcept { return words_.size(); }
    bool empty() const noexcept { return words_.empty(); }

    /// Words in byte-lexicographic order.
    std::vector<std::string_view> sorted_words() const;

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
    };
    std::unordered_map<std::string, PhonemeSeq, Hash, std::equal_to<>> words_;
};

struct DictionaryLoad {
    PronunciationTable table;
    std::size_t warnings = 0;   // malformed lines skipped
    std::size_t alternates = 0; // "word(2)" lines skipped
};

/// CMUdict plain text. Both the classic layout ("CAT  K AE1 T", ";;;"
/// comments) and the newer lowercase layout with trailing "# note" comments
/// are accepted. Throws Error(io_error) if the file cannot be read.
DictionaryLoad load_dictionary(const std::filesystem::path& path);
DictionaryLoad parse_dictionary(std::istream& in);

/// 1280 samples per phoneme at 16 kHz. Throws Error(invalid_argument) on an
/// empty sequence and Error(unknown_phoneme) on an out-of-range value.
Waveform synthesize(std::span<const Phoneme> phonemes);

/// normalize(bin16(|FFT|^2)). Throws Error(invalid_argument) below 256
/// samples and Error(degenerate_signal) when no energy lands in the bands.
Fingerprint fingerprint(std::span<const float> waveform);

struct TokenFlags {
    bool punctuation = false;
    bool oov_synthetic = false;

    std::uint8_t to_byte() const noexcept
    {
        return static_cast<std::uint8_t>((punctuation ? 1U : 0U) | (oov_synthetic ? 2U : 0U));
    }
    static TokenFlags from_byte(std::uint8_t b) noexcept { return {(b & 1U) != 0, (b & 2U) != 0}; }
    friend bool operator==(const TokenFlags&, const TokenFlags&) = default;
};

struct TokenFingerprint {
    Fingerprint fingerprint;
    TokenFlags flags;
};

Fingerprint punctuation_fingerprint(char32_t codepoint);
Fingerprint oov_fingerprint(std::string_view lowercase_bytes);

/// Dictionary words are synthesized, single non-word codepoints get a noise
/// fingerprint keyed by the codepoint, anything else is hashed.
/// Throws Error(invalid_argument) for an empty token.
TokenFingerprint fingerprint_token(std::string_view surface, const PronunciationTable& table);

/// Thread-safe memo over fingerprint_token, keyed by lowercase surface. The
/// table must outlive the cache.
class FingerprintCache {
public:
    explicit FingerprintCache(const PronunciationTable& table) : table_(&table) {}

    TokenFingerprint get(std::string_view surface);
    std::size_t size() const;
    const PronunciationTable& table() const noexcept { return *table_; }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
    };
    const PronunciationTable* table_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, TokenFingerprint, Hash, std::equal_to<>> entries_;
};

} // namespace ptm::phonetics
