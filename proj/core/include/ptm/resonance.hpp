#pragma once

// Decode side: recover each bridge's force vector from two consecutive
// states, shortlist acoustically similar words, then fuse the transition-error
// distribution with a semantic prior.

#include "ptm/memory.hpp"
#include "ptm/vocab_index.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ptm {

struct DecoderConfig {
    double alpha = 0.4;  // weight of the prior
    double gamma = 25.0; // sharpness of the transition-error softmax
    std::size_t top_k = 32;
    double unknown_threshold = 0.55; // on the best cosine
    std::string unknown_marker = "<aba?>";

    /// Throws Error(invalid_argument) when a field is out of range.
    void validate() const;
};

/// score() returns one probability per candidate, summing to 1. Priors that
/// cannot answer throw Error(prior_unavailable) or Error(malformed_response);
/// the decoder degrades to signal-only for that position.
class SemanticPrior {
public:
    virtual ~SemanticPrior() = default;

    virtual std::vector<double> score(std::span<const std::string> context,
                                      std::span<const std::string_view> candidates) const = 0;

    /// True if score() ignores the context, which lets positions decode in
    /// parallel.
    virtual bool context_free() const noexcept { return false; }
    virtual std::string name() const = 0;
};

class UniformPrior final : public SemanticPrior {
public:
    std::vector<double> score(std::span<const std::string> context,
                              std::span<const std::string_view> candidates) const override;
    bool context_free() const noexcept override { return true; }
    std::string name() const override { return "uniform"; }
};

/// Bigram model over lowercase tokens with add-k smoothing.
class NgramPrior final : public SemanticPrior {
public:
    static constexpr double kDefaultK = 0.1;

    /// Throws Error(invalid_argument) on an empty corpus.
    static NgramPrior train(std::span<const std::string> tokens, double k = kDefaultK);
    static NgramPrior train_text(std::string_view text, double k = kDefaultK);

    /// P(c | last context token), renormalized over the candidates; with no
    /// context, smoothed unigram probabilities.
    std::vector<double> score(std::span<const std::string> context,
                              std::span<const std::string_view> candidates) const override;
    std::string name() const override { return "ngram"; }

    std::size_t vocabulary() const noexcept { return unigram_.size(); }
    std::uint64_t total() const noexcept { return total_; }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
    };
    using Counts = std::unordered_map<std::string, std::uint64_t, Hash, std::equal_to<>>;

    double k_ = kDefaultK;
    std::uint64_t total_ = 0;
    Counts unigram_;
    Counts history_; // how often each token is followed by another
    std::unordered_map<std::string, Counts, Hash, std::equal_to<>> bigram_;
};

struct RemotePriorConfig {
    std::string endpoint;                     // http://host[:port]/path
    std::chrono::milliseconds timeout{10'000};
    int retries = 1;                          // extra attempts after a transport failure
    std::size_t context_window = 64;          // most recent tokens sent
};

/// POSTs {"context": [...], "candidates": [...]} and expects {"logprobs":
/// [...]} aligned with the candidates. Safe to call from several threads.
class RemotePrior final : public SemanticPrior {
public:
    /// Throws Error(invalid_argument) for an endpoint it cannot parse.
    explicit RemotePrior(RemotePriorConfig config);

    std::vector<double> score(std::span<const std::string> context,
                              std::span<const std::string_view> candidates) const override;
    std::string name() const override { return "remote"; }
    const RemotePriorConfig& config() const noexcept { return config_; }

    /// Softmax of a logprob response body; throws Error(malformed_response).
    static std::vector<double> parse_response(std::string_view body, std::size_t expected);

private:
    RemotePriorConfig config_;
    std::string base_; // scheme://host:port
    std::string path_;
};

/// softmax(-gamma * d_x) with d_x = dist(evolve(R, S_prev, f_x), S_t).
std::vector<double> signal_probs(const RotationOperator& rotation, const TorusState& prev, const TorusState& current,
                                 std::span<const phonetics::Fingerprint> candidates, double gamma);

/// The transition errors d_x themselves.
std::vector<double> transition_errors(const RotationOperator& rotation, const TorusState& prev,
                                      const TorusState& current, std::span<const phonetics::Fingerprint> candidates);

enum class Outcome : std::uint8_t { anchor_hit, signal_led, prior_led, consensus, unknown };
std::string_view to_string(Outcome o) noexcept;

struct CandidateScore {
    std::string surface;
    double cosine = 0.0;
    double distance = 0.0;
    double p_signal = 0.0;
    double p_prior = 0.0;
    double p_total = 0.0;
};

struct PositionLog {
    std::uint64_t position = 0; // 1-based step t
    phonetics::Fingerprint v_rec;
    std::vector<CandidateScore> candidates;
    std::string chosen;
    Outcome outcome = Outcome::signal_led;
    bool prior_degraded = false; // prior failed; p_prior mirrors p_signal
};

struct DecodedPosition {
    std::string surface;
    PositionLog log;
};

struct Reconstruction {
    std::vector<std::string> tokens;
    std::vector<PositionLog> logs;
    std::size_t degraded_positions = 0;
};

class Decoder {
public:
    /// Throws Error(synth_version_mismatch) if the trace and index were built
    /// with different synthesizers, Error(invalid_argument) for a bad config
    /// or an empty index.
    Decoder(const MemoryTrace& trace, const VocabIndex& vocab, const SemanticPrior& prior, DecoderConfig config);

    /// 1 <= t <= token_count. Anchors come back verbatim; `context` is the
    /// already decoded prefix. Cost does not depend on t.
    DecodedPosition decode_position(std::uint64_t t, std::span<const std::string> context) const;

    /// Bridge path regardless of anchors (benchmarks use this).
    DecodedPosition decode_bridge(std::uint64_t t, std::span<const std::string> context) const;

    /// Greedy left-to-right decode. `threads` > 1 is honoured only for
    /// context-free priors; results are identical either way.
    Reconstruction reconstruct(unsigned threads = 1) const;

    const DecoderConfig& config() const noexcept { return config_; }

private:
    const MemoryTrace* trace_;
    const VocabIndex* vocab_;
    const SemanticPrior* prior_;
    DecoderConfig config_;
    RotationOperator rotation_;
};

/// Index of the largest value, ties to the lexicographically smallest
/// surface.
std::size_t argmax_lexicographic(std::span<const double> values, std::span<const std::string> surfaces);

} // namespace ptm
