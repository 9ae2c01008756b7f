#include "ptm/resonance.hpp"

#include "ptm/error.hpp"
#include "ptm/text.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace ptm {
namespace {

std::vector<double> softmax_neg(std::span<const double> d, double gamma)
{
    std::vector<double> p(d.size());
    if (d.empty()) return p;
    const double best = *std::min_element(d.begin(), d.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        p[i] = std::exp(-gamma * (d[i] - best));
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return p;
}

bool is_flat(std::span<const double> p)
{
    return std::adjacent_find(p.begin(), p.end(), std::not_equal_to<>()) == p.end();
}

bool recoverable(const Error& e)
{
    return e.code() == ErrorCode::prior_unavailable || e.code() == ErrorCode::malformed_response;
}

} // namespace

void DecoderConfig::validate() const
{
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::invalid_argument, "decoder: alpha must be in [0, 1]");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw Error(ErrorCode::invalid_argument, "decoder: gamma must be finite and >= 0");
    }
    if (top_k == 0) throw Error(ErrorCode::invalid_argument, "decoder: top_k must be >= 1");
    if (!(unknown_threshold >= 0.0 && unknown_threshold <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "decoder: unknown_threshold must be in [0, 1]");
    }
}

std::vector<double> UniformPrior::score(std::span<const std::string>, std::span<const std::string_view> candidates) const
{
    if (candidates.empty()) return {};
    return std::vector<double>(candidates.size(), 1.0 / static_cast<double>(candidates.size()));
}

NgramPrior NgramPrior::train(std::span<const std::string> tokens, double k)
{
    if (tokens.empty()) throw Error(ErrorCode::invalid_argument, "ngram: empty training corpus");
    if (!(k > 0.0)) throw Error(ErrorCode::invalid_argument, "ngram: smoothing constant must be > 0");
    NgramPrior prior;
    prior.k_ = k;
    std::string prev;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string cur = text::to_lower_ascii(tokens[i]);
        ++prior.unigram_[cur];
        ++prior.total_;
        if (i > 0) {
            ++prior.history_[prev];
            ++prior.bigram_[prev][cur];
        }
        prev = std::move(cur);
    }
    return prior;
}

NgramPrior NgramPrior::train_text(std::string_view text, double k)
{
    return train(tokenize(text), k);
}

std::vector<double> NgramPrior::score(std::span<const std::string> context,
                                      std::span<const std::string_view> candidates) const
{
    // The shared denominators of P(c | prev) and P(c) cancel once the scores
    // are renormalized over the candidate set.
    const Counts* row = nullptr;
    bool conditioned = false;
    if (!context.empty()) {
        conditioned = true;
        if (const auto it = bigram_.find(text::to_lower_ascii(context.back())); it != bigram_.end()) row = &it->second;
    }
    std::vector<double> p(candidates.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const std::string c = text::to_lower_ascii(candidates[i]);
        std::uint64_t n = 0;
        if (conditioned) {
            if (row != nullptr) {
                if (const auto it = row->find(c); it != row->end()) n = it->second;
            }
        } else if (const auto it = unigram_.find(c); it != unigram_.end()) {
            n = it->second;
        }
        p[i] = static_cast<double>(n) + k_;
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return p;
}

std::vector<double> transition_errors(const RotationOperator& rotation, const TorusState& prev,
                                      const TorusState& current, std::span<const phonetics::Fingerprint> candidates)
{
    std::vector<double> d(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        d[i] = torus_distance(evolve(rotation, prev, candidates[i]), current);
    }
    return d;
}

std::vector<double> signal_probs(const RotationOperator& rotation, const TorusState& prev, const TorusState& current,
                                 std::span<const phonetics::Fingerprint> candidates, double gamma)
{
    const auto d = transition_errors(rotation, prev, current, candidates);
    return softmax_neg(d, gamma);
}

std::string_view to_string(Outcome o) noexcept
{
    switch (o) {
    case Outcome::anchor_hit: return "anchor_hit";
    case Outcome::signal_led: return "signal_led";
    case Outcome::prior_led: return "prior_led";
    case Outcome::consensus: return "consensus";
    case Outcome::unknown: return "unknown";
    }
    return "?";
}

std::size_t argmax_lexicographic(std::span<const double> values, std::span<const std::string> surfaces)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best] || (values[i] == values[best] && surfaces[i] < surfaces[best])) best = i;
    }
    return best;
}

Decoder::Decoder(const MemoryTrace& trace, const VocabIndex& vocab, const SemanticPrior& prior, DecoderConfig config)
    : trace_(&trace), vocab_(&vocab), prior_(&prior), config_(std::move(config)), rotation_(trace.rotation())
{
    config_.validate();
    if (trace.config.synth_version != vocab.synth_version()) {
        throw Error(ErrorCode::synth_version_mismatch,
                    "trace synth version " + std::to_string(trace.config.synth_version) +
                        " does not match vocabulary index version " + std::to_string(vocab.synth_version()));
    }
    if (vocab.empty()) throw Error(ErrorCode::invalid_argument, "decoder: empty vocabulary index");
}

DecodedPosition Decoder::decode_position(std::uint64_t t, std::span<const std::string> context) const
{
    if (t < 1 || t > trace_->token_count()) {
        throw Error(ErrorCode::invalid_argument, "decode_position: t = " + std::to_string(t) + " outside [1, " +
                                                     std::to_string(trace_->token_count()) + "]");
    }
    if (const std::string* anchor = trace_->anchor_at(t - 1)) {
        DecodedPosition out;
        out.surface = *anchor;
        out.log.position = t;
        out.log.v_rec = invert_step(rotation_, trace_->states[t], trace_->states[t - 1]);
        out.log.candidates.push_back({*anchor, 1.0, 0.0, 1.0, 1.0, 1.0});
        out.log.chosen = *anchor;
        out.log.outcome = Outcome::anchor_hit;
        return out;
    }
    return decode_bridge(t, context);
}

DecodedPosition Decoder::decode_bridge(std::uint64_t t, std::span<const std::string> context) const
{
    if (t < 1 || t > trace_->token_count()) {
        throw Error(ErrorCode::invalid_argument, "decode_bridge: t out of range");
    }
    const TorusState& prev = trace_->states[t - 1];
    const TorusState& cur = trace_->states[t];

    DecodedPosition out;
    PositionLog& log = out.log;
    log.position = t;
    log.v_rec = invert_step(rotation_, cur, prev);

    const auto neighbors = vocab_->nearest(log.v_rec, config_.top_k);
    std::vector<phonetics::Fingerprint> fps;
    std::vector<std::string> surfaces;
    std::vector<std::string_view> views;
    fps.reserve(neighbors.size());
    surfaces.reserve(neighbors.size());
    for (const auto& n : neighbors) {
        fps.push_back(vocab_->fingerprint(n.index));
        surfaces.emplace_back(n.surface);
    }
    for (const auto& s : surfaces) views.emplace_back(s);

    const auto dist = transition_errors(rotation_, prev, cur, fps);
    const auto p_signal = softmax_neg(dist, config_.gamma);
    std::vector<double> p_prior;
    try {
        p_prior = prior_->score(context, views);
        if (p_prior.size() != surfaces.size()) {
            throw Error(ErrorCode::malformed_response, "prior returned the wrong number of scores");
        }
    } catch (const Error& e) {
        if (!recoverable(e)) throw;
        log.prior_degraded = true;
        p_prior = p_signal;
    }

    std::vector<double> p_total(surfaces.size());
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        p_total[i] = config_.alpha * p_prior[i] + (1.0 - config_.alpha) * p_signal[i];
    }
    log.candidates.reserve(surfaces.size());
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        log.candidates.push_back({surfaces[i], neighbors[i].cosine, dist[i], p_signal[i], p_prior[i], p_total[i]});
    }

    const std::size_t chosen = argmax_lexicographic(p_total, surfaces);
    const std::size_t by_signal = argmax_lexicographic(p_signal, surfaces);
    const std::size_t by_prior = argmax_lexicographic(p_prior, surfaces);

    if (neighbors.front().cosine < config_.unknown_threshold) {
        log.chosen = config_.unknown_marker;
        log.outcome = Outcome::unknown;
    } else {
        log.chosen = surfaces[chosen];
        if (log.prior_degraded || is_flat(p_prior)) {
            log.outcome = chosen == by_signal ? Outcome::signal_led : Outcome::consensus;
        } else if (chosen == by_signal && chosen == by_prior) {
            log.outcome = Outcome::consensus;
        } else if (chosen == by_signal) {
            log.outcome = Outcome::signal_led;
        } else if (chosen == by_prior) {
            log.outcome = Outcome::prior_led;
        } else {
            log.outcome = Outcome::consensus;
        }
    }
    out.surface = log.chosen;
    return out;
}

Reconstruction Decoder::reconstruct(unsigned threads) const
{
    const std::uint64_t n = trace_->token_count();
    Reconstruction out;
    out.tokens.resize(n);
    out.logs.resize(n);

    if (threads > 1 && prior_->context_free() && n > 1) {
        std::vector<std::jthread> pool;
        const std::uint64_t chunk = (n + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            const std::uint64_t begin = w * chunk;
            const std::uint64_t end = std::min<std::uint64_t>(n, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back([&, begin, end] {
                for (std::uint64_t i = begin; i < end; ++i) {
                    auto d = decode_position(i + 1, {});
                    out.tokens[i] = std::move(d.surface);
                    out.logs[i] = std::move(d.log);
                }
            });
        }
    } else {
        for (std::uint64_t i = 0; i < n; ++i) {
            auto d = decode_position(i + 1, std::span<const std::string>(out.tokens.data(), i));
            out.tokens[i] = std::move(d.surface);
            out.logs[i] = std::move(d.log);
        }
    }
    for (const auto& log : out.logs) out.degraded_positions += log.prior_degraded ? 1 : 0;
    return out;
}

} // namespace ptm
