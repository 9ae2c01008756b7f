#pragma once

// Encode side: tokenize, score, choose anchors, fold fingerprints into a
// state trajectory, and (de)serialize the resulting trace.

#include "ptm/manifold.hpp"
#include "ptm/phonetics.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ptm {

/// Whitespace split; leading/trailing non-word codepoints become one-codepoint
/// tokens; internal hyphens split words; case is preserved.
std::vector<std::string> tokenize(std::string_view text);

/// True if every codepoint is a decimal digit (ASCII) or the token mixes
/// digits with the separators "." and ",".
bool is_numeral(std::string_view token);

class CorpusStats {
public:
    CorpusStats() = default;
    static CorpusStats from_tokens(std::span<const std::string> tokens);
    static CorpusStats from_text(std::string_view text) { return from_tokens(tokenize(text)); }

    std::uint64_t count(std::string_view lowercase) const;
    std::uint64_t total() const noexcept { return total_; }
    std::size_t vocabulary() const noexcept { return counts_.size(); }

    /// -log2((c + 1) / (total + V + 1)): add-one smoothing with one extra
    /// slot for unseen words, so unseen tokens get the maximum.
    double surprisal(std::string_view lowercase) const;
    double max_surprisal() const { return surprisal_of(0); }

private:
    double surprisal_of(std::uint64_t c) const;

    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
    };
    std::unordered_map<std::string, std::uint64_t, Hash, std::equal_to<>> counts_;
    std::uint64_t total_ = 0;
};

/// Punctuation scores 0; everything else is unigram surprisal of its
/// lowercase form.
double importance(std::string_view token, const CorpusStats& stats);

struct AnchorPolicy {
    enum class Mode : std::uint8_t { target_rate, threshold };

    Mode mode = Mode::target_rate;
    double target_drop_rate = 0.72;
    double surprisal_threshold = std::numeric_limits<double>::infinity();
    bool always_anchor_oov = false;
    bool always_anchor_numerals = false;

    /// Throws Error(invalid_argument) for a drop rate outside [0, 1] or a NaN
    /// threshold.
    void validate() const;
};

/// round((1 - drop_rate) * n), clamped to [0, n].
std::size_t target_anchor_count(std::size_t n, double drop_rate);

/// target_rate: the top-scoring tokens, ties to the earlier position.
/// threshold: importance >= threshold. Forced anchors (OOV / numerals, when
/// enabled) are always kept; in target_rate mode they count toward the quota.
std::vector<bool> select_anchors(std::span<const std::string> tokens, const AnchorPolicy& policy,
                                 const CorpusStats& stats, const phonetics::PronunciationTable* table = nullptr);

struct TokenRecord {
    std::string surface;
    std::uint64_t position = 0;
    bool is_anchor = false;
    phonetics::TokenFlags flags;

    friend bool operator==(const TokenRecord&, const TokenRecord&) = default;
};

struct TraceConfig {
    std::array<std::uint32_t, kRotorCount> primes = RotationOperator::kDefaultPrimes;
    Precision precision = Precision::f32;
    std::uint32_t synth_version = phonetics::kSynthVersion;

    friend bool operator==(const TraceConfig&, const TraceConfig&) = default;
};

struct Anchor {
    std::uint64_t position = 0;
    std::string surface;

    friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct MemoryTrace {
    TraceConfig config;
    std::vector<TorusState> states{TorusState::zero()}; // S_0 .. S_N
    std::vector<Anchor> anchors;                        // strictly increasing positions

    std::uint64_t token_count() const noexcept { return states.size() - 1; }
    /// Anchor surface at a 0-based token position, if any.
    const std::string* anchor_at(std::uint64_t position) const;
    RotationOperator rotation() const { return RotationOperator::from_primes(config.primes); }

    /// (N + 1) * 16 * 4.
    std::uint64_t signal_bytes() const noexcept { return states.size() * kDim * sizeof(float); }

    friend bool operator==(const MemoryTrace&, const MemoryTrace&) = default;
};

struct EncodeResult {
    MemoryTrace trace;
    std::vector<TokenRecord> records;
};

/// S_0 = 0, S_t = evolve(R, S_{t-1}, fingerprint(token t-1)). `anchor_flags`
/// must be empty (no anchors) or one flag per token.
EncodeResult encode(std::span<const std::string> tokens, const std::vector<bool>& anchor_flags,
                    const RotationOperator& rotation, phonetics::FingerprintCache& cache);

inline constexpr std::uint16_t kTraceVersion = 1;

/// Byte size of the fixed header (everything before the anchor table).
inline constexpr std::size_t kTraceHeaderBytes = 4 + 2 + 2 + 1 + 1 + 4 * kRotorCount + 4 + 8 + 8;

std::string serialize_trace(const MemoryTrace& trace);
/// Distinct errors: bad_magic, version_mismatch, truncated,
/// checksum_mismatch, corrupt.
MemoryTrace deserialize_trace(std::string_view bytes);

void write_trace(const MemoryTrace& trace, const std::string& path);
MemoryTrace read_trace(const std::string& path);

} // namespace ptm
