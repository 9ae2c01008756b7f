#include "ptm/memory.hpp"

#include "ptm/error.hpp"
#include "ptm/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ptm {
namespace {

bool is_space(char32_t c) noexcept
{
    switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
        return true;
    default:
        return c >= 0x2000 && c <= 0x200B;
    }
}

bool is_hyphen(char32_t c) noexcept
{
    return c == U'-' || c == 0x2010;
}

class Splitter {
public:
    Splitter(std::string_view text, const std::vector<text::Codepoint>& cps) : text_(text), cps_(cps) {}

    void chunk(std::size_t b, std::size_t e, std::vector<std::string>& out) const
    {
        while (b < e && !text::is_word_codepoint(cps_[b].value)) emit(b, b + 1, out), ++b;
        std::size_t trail = e;
        while (trail > b && !text::is_word_codepoint(cps_[trail - 1].value)) --trail;
        if (b < trail) {
            std::size_t h = b;
            while (h < trail && !is_hyphen(cps_[h].value)) ++h;
            if (h < trail) {
                chunk(b, h, out);
                chunk(h + 1, trail, out);
            } else {
                emit(b, trail, out);
            }
        }
        for (std::size_t i = trail; i < e; ++i) emit(i, i + 1, out);
    }

private:
    void emit(std::size_t b, std::size_t e, std::vector<std::string>& out) const
    {
        const std::size_t from = cps_[b].offset;
        const std::size_t to = cps_[e - 1].offset + cps_[e - 1].length;
        out.emplace_back(text_.substr(from, to - from));
    }

    std::string_view text_;
    const std::vector<text::Codepoint>& cps_;
};

} // namespace

std::vector<std::string> tokenize(std::string_view text)
{
    const auto cps = text::decode_utf8(text);
    const Splitter splitter(text, cps);
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < cps.size()) {
        while (i < cps.size() && is_space(cps[i].value)) ++i;
        std::size_t j = i;
        while (j < cps.size() && !is_space(cps[j].value)) ++j;
        if (i < j) splitter.chunk(i, j, out);
        i = j;
    }
    return out;
}

bool is_numeral(std::string_view token)
{
    if (token.empty() || token.front() < '0' || token.front() > '9') return false;
    return std::all_of(token.begin(), token.end(),
                       [](char c) { return (c >= '0' && c <= '9') || c == '.' || c == ','; });
}

CorpusStats CorpusStats::from_tokens(std::span<const std::string> tokens)
{
    CorpusStats stats;
    for (const auto& t : tokens) {
        if (text::is_punctuation_token(t)) continue;
        ++stats.counts_[text::to_lower_ascii(t)];
        ++stats.total_;
    }
    return stats;
}

std::uint64_t CorpusStats::count(std::string_view lowercase) const
{
    const auto it = counts_.find(lowercase);
    return it == counts_.end() ? 0 : it->second;
}

double CorpusStats::surprisal_of(std::uint64_t c) const
{
    const double denom = static_cast<double>(total_) + static_cast<double>(counts_.size()) + 1.0;
    return -std::log2((static_cast<double>(c) + 1.0) / denom);
}

double CorpusStats::surprisal(std::string_view lowercase) const
{
    return surprisal_of(count(lowercase));
}

double importance(std::string_view token, const CorpusStats& stats)
{
    if (text::is_punctuation_token(token)) return 0.0;
    return stats.surprisal(text::to_lower_ascii(token));
}

void AnchorPolicy::validate() const
{
    if (!(target_drop_rate >= 0.0 && target_drop_rate <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "anchor policy: drop rate must be in [0, 1]");
    }
    if (std::isnan(surprisal_threshold)) {
        throw Error(ErrorCode::invalid_argument, "anchor policy: threshold is NaN");
    }
}

std::size_t target_anchor_count(std::size_t n, double drop_rate)
{
    const double raw = (1.0 - drop_rate) * static_cast<double>(n);
    const long long rounded = std::llround(raw);
    return static_cast<std::size_t>(std::clamp<long long>(rounded, 0, static_cast<long long>(n)));
}

std::vector<bool> select_anchors(std::span<const std::string> tokens, const AnchorPolicy& policy,
                                 const CorpusStats& stats, const phonetics::PronunciationTable* table)
{
    policy.validate();
    if (policy.always_anchor_oov && table == nullptr) {
        throw Error(ErrorCode::invalid_argument, "anchor policy: always_anchor_oov needs a pronunciation table");
    }
    const std::size_t n = tokens.size();
    std::vector<double> score(n);
    std::vector<bool> forced(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        score[i] = importance(tokens[i], stats);
        if (policy.always_anchor_numerals && is_numeral(tokens[i])) forced[i] = true;
        if (policy.always_anchor_oov && !text::is_punctuation_token(tokens[i]) &&
            !table->contains(text::to_lower_ascii(tokens[i]))) {
            forced[i] = true;
        }
    }

    std::vector<bool> anchors(n, false);
    if (policy.mode == AnchorPolicy::Mode::threshold) {
        for (std::size_t i = 0; i < n; ++i) anchors[i] = forced[i] || score[i] >= policy.surprisal_threshold;
        return anchors;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (forced[a] != forced[b]) return static_cast<bool>(forced[a]);
        return score[a] > score[b];
    });
    const auto forced_count = static_cast<std::size_t>(std::count(forced.begin(), forced.end(), true));
    const std::size_t quota = std::max(target_anchor_count(n, policy.target_drop_rate), forced_count);
    for (std::size_t k = 0; k < quota; ++k) anchors[order[k]] = true;
    return anchors;
}

const std::string* MemoryTrace::anchor_at(std::uint64_t position) const
{
    const auto it = std::lower_bound(anchors.begin(), anchors.end(), position,
                                     [](const Anchor& a, std::uint64_t p) { return a.position < p; });
    if (it == anchors.end() || it->position != position) return nullptr;
    return &it->surface;
}

EncodeResult encode(std::span<const std::string> tokens, const std::vector<bool>& anchor_flags,
                    const RotationOperator& rotation, phonetics::FingerprintCache& cache)
{
    if (!anchor_flags.empty() && anchor_flags.size() != tokens.size()) {
        throw Error(ErrorCode::invalid_argument, "encode: anchor flags do not match token count");
    }
    EncodeResult out;
    out.trace.config.primes = rotation.primes();
    out.trace.states.reserve(tokens.size() + 1);
    out.records.reserve(tokens.size());

    TorusState state = TorusState::zero();
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const auto tf = cache.get(tokens[t]);
        state = evolve(rotation, state, tf.fingerprint);
        out.trace.states.push_back(state);

        const bool anchor = !anchor_flags.empty() && anchor_flags[t];
        if (anchor) out.trace.anchors.push_back({t, tokens[t]});
        out.records.push_back({tokens[t], t, anchor, tf.flags});
    }
    return out;
}

} // namespace ptm
