#include "ptm/phonetics.hpp"

#include "ptm/detmath.hpp"
#include "ptm/error.hpp"
#include "ptm/spectrum.hpp"
#include "ptm/text.hpp"
#include "mix.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <sstream>

namespace ptm::phonetics {
namespace {

struct PhonemeSpec {
    std::string_view symbol;
    PhonemeClass cls;
    std::array<double, 3> hz; // formants for vowels, hz[0] for sonorants
};

using C = PhonemeClass;

// Monophthong formants are the adult-male averages of Peterson & Barney
// (1952). Diphthongs are frozen to one representative target each. Sonorant
// tones sit near their first prominent resonance.
constexpr std::array<PhonemeSpec, kPhonemeCount> kPhonemes{{
    {"AA", C::vowel, {730, 1090, 2440}},
    {"AE", C::vowel, {660, 1720, 2410}},
    {"AH", C::vowel, {520, 1190, 2390}},
    {"AO", C::vowel, {570, 840, 2410}},
    {"AW", C::vowel, {680, 1200, 2400}},
    {"AY", C::vowel, {660, 1500, 2500}},
    {"B", C::stop, {}},
    {"CH", C::affricate, {}},
    {"D", C::stop, {}},
    {"DH", C::fricative, {}},
    {"EH", C::vowel, {530, 1840, 2480}},
    {"ER", C::vowel, {490, 1350, 1690}},
    {"EY", C::vowel, {476, 2089, 2691}},
    {"F", C::fricative, {}},
    {"G", C::stop, {}},
    {"HH", C::aspirate, {}},
    {"IH", C::vowel, {390, 1990, 2550}},
    {"IY", C::vowel, {270, 2290, 3010}},
    {"JH", C::affricate, {}},
    {"K", C::stop, {}},
    {"L", C::liquid, {620, 0, 0}},
    {"M", C::nasal, {250, 0, 0}},
    {"N", C::nasal, {310, 0, 0}},
    {"NG", C::nasal, {390, 0, 0}},
    {"OW", C::vowel, {497, 910, 2459}},
    {"OY", C::vowel, {500, 1000, 2400}},
    {"P", C::stop, {}},
    {"R", C::liquid, {1350, 0, 0}},
    {"S", C::fricative, {}},
    {"SH", C::fricative, {}},
    {"T", C::stop, {}},
    {"TH", C::fricative, {}},
    {"UH", C::vowel, {440, 1020, 2240}},
    {"UW", C::vowel, {300, 870, 2240}},
    {"V", C::fricative, {}},
    {"W", C::glide, {700, 0, 0}},
    {"Y", C::glide, {2100, 0, 0}},
    {"Z", C::fricative, {}},
    {"ZH", C::fricative, {}},
}};

constexpr std::array<double, 3> kFormantGain{1.0, 0.6, 0.3};
constexpr double kFricativeGain = 0.5;
constexpr double kAspirateGain = 0.25;
constexpr double kBurstGain = 1.0;
constexpr std::size_t kBurstSamples = 320; // 20 ms release, then closure silence

constexpr std::uint64_t kPhonemeNoiseDomain = 0x50484F4E454D45ULL;  // "PHONEME"
constexpr std::uint64_t kPunctNoiseDomain = 0x50554E4354ULL;        // "PUNCT"

float noise_sample(std::uint64_t seed, std::size_t n, double gain) noexcept
{
    const double u = detail::unit_interval(detail::splitmix64_at(seed, n));
    return static_cast<float>(gain * (2.0 * u - 1.0));
}

float tone_sample(double hz, std::size_t n) noexcept
{
    return static_cast<float>(detmath::sin_turns(hz * static_cast<double>(n) / kSampleRate));
}

Waveform render_segment(std::size_t index)
{
    const PhonemeSpec& spec = kPhonemes[index];
    const std::uint64_t seed = kPhonemeNoiseDomain ^ ((index + 1) * 0x9E3779B97F4A7C15ULL);
    Waveform w(kSamplesPerPhoneme, 0.0f);
    for (std::size_t n = 0; n < kSamplesPerPhoneme; ++n) {
        switch (spec.cls) {
        case C::vowel: {
            double acc = 0.0;
            for (std::size_t f = 0; f < 3; ++f) {
                acc += kFormantGain[f] * detmath::sin_turns(spec.hz[f] * static_cast<double>(n) / kSampleRate);
            }
            w[n] = static_cast<float>(acc);
            break;
        }
        case C::nasal:
        case C::liquid:
        case C::glide:
            w[n] = tone_sample(spec.hz[0], n);
            break;
        case C::fricative:
        case C::affricate:
            w[n] = noise_sample(seed, n, kFricativeGain);
            break;
        case C::aspirate:
            w[n] = noise_sample(seed, n, kAspirateGain);
            break;
        case C::stop:
            if (n < kBurstSamples) w[n] = noise_sample(seed, n, kBurstGain);
            break;
        }
    }
    return w;
}

// Each phoneme's samples depend only on the phoneme, so segments are rendered
// once and concatenated.
const std::array<Waveform, kPhonemeCount>& segments()
{
    static const std::array<Waveform, kPhonemeCount> table = [] {
        std::array<Waveform, kPhonemeCount> t;
        for (std::size_t i = 0; i < kPhonemeCount; ++i) t[i] = render_segment(i);
        return t;
    }();
    return table;
}

const std::array<double, spectrum::kBands + 1>& edges()
{
    static const auto e = spectrum::band_edges(kBandLowHz, kBandHighHz);
    return e;
}

Fingerprint normalized(const std::array<double, 16>& v)
{
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorCode::degenerate_signal, "fingerprint: no spectral energy in 50 Hz - 8 kHz");
    }
    Fingerprint fp;
    for (std::size_t i = 0; i < kDim; ++i) fp.coords[i] = static_cast<float>(v[i] / norm);
    return fp;
}

bool is_alternate(std::string_view word)
{
    if (word.size() < 3 || word.back() != ')') return false;
    const auto open = word.rfind('(');
    if (open == std::string_view::npos || open == 0 || open + 2 > word.size() - 1) return false;
    return std::all_of(word.begin() + static_cast<std::ptrdiff_t>(open) + 1, word.end() - 1,
                       [](char c) { return c >= '0' && c <= '9'; });
}

} // namespace

std::string_view symbol(Phoneme p) noexcept
{
    return kPhonemes[static_cast<std::size_t>(p)].symbol;
}

PhonemeClass phoneme_class(Phoneme p) noexcept
{
    return kPhonemes[static_cast<std::size_t>(p)].cls;
}

std::optional<Phoneme> parse_phoneme(std::string_view text)
{
    if (!text.empty() && text.back() >= '0' && text.back() <= '2') text.remove_suffix(1);
    if (text.empty() || text.size() > 2) return std::nullopt;
    std::string upper(text);
    for (char& c : upper) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    for (std::size_t i = 0; i < kPhonemeCount; ++i) {
        if (kPhonemes[i].symbol == upper) return static_cast<Phoneme>(i);
    }
    return std::nullopt;
}

PhonemeSeq parse_phonemes(std::string_view text)
{
    PhonemeSeq out;
    std::istringstream in{std::string(text)};
    std::string sym;
    while (in >> sym) {
        const auto p = parse_phoneme(sym);
        if (!p) throw Error(ErrorCode::unknown_phoneme, "unknown phoneme '" + sym + "'");
        out.push_back(*p);
    }
    return out;
}

bool PronunciationTable::insert(std::string word, PhonemeSeq phonemes)
{
    return words_.try_emplace(std::move(word), std::move(phonemes)).second;
}

const PhonemeSeq* PronunciationTable::find(std::string_view lowercase_word) const
{
    const auto it = words_.find(lowercase_word);
    return it == words_.end() ? nullptr : &it->second;
}

std::vector<std::string_view> PronunciationTable::sorted_words() const
{
    std::vector<std::string_view> out;
    out.reserve(words_.size());
    for (const auto& [word, _] : words_) out.emplace_back(word);
    std::sort(out.begin(), out.end());
    return out;
}

DictionaryLoad parse_dictionary(std::istream& in)
{
    DictionaryLoad out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind(";;;", 0) == 0) continue;
        if (const auto hash = line.find(" #"); hash != std::string::npos) line.resize(hash);
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        std::istringstream fields(line);
        std::string word;
        fields >> word;
        if (is_alternate(word)) {
            ++out.alternates;
            continue;
        }
        PhonemeSeq phonemes;
        bool ok = true;
        std::string sym;
        while (fields >> sym) {
            const auto p = parse_phoneme(sym);
            if (!p) {
                ok = false;
                break;
            }
            phonemes.push_back(*p);
        }
        if (!ok || phonemes.empty()) {
            ++out.warnings;
            continue;
        }
        out.table.insert(text::to_lower_ascii(word), std::move(phonemes));
    }
    return out;
}

DictionaryLoad load_dictionary(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot read dictionary '" + path.string() + "'");
    return parse_dictionary(in);
}

Waveform synthesize(std::span<const Phoneme> phonemes)
{
    if (phonemes.empty()) throw Error(ErrorCode::invalid_argument, "synthesize: empty phoneme sequence");
    const auto& segs = segments();
    Waveform out;
    out.reserve(phonemes.size() * kSamplesPerPhoneme);
    for (Phoneme p : phonemes) {
        const auto index = static_cast<std::size_t>(p);
        if (index >= kPhonemeCount) {
            throw Error(ErrorCode::unknown_phoneme, "synthesize: phoneme id " + std::to_string(index));
        }
        out.insert(out.end(), segs[index].begin(), segs[index].end());
    }
    return out;
}

Fingerprint fingerprint(std::span<const float> waveform)
{
    if (waveform.size() < kMinFingerprintSamples) {
        throw Error(ErrorCode::invalid_argument, "fingerprint: need at least 256 samples, got " +
                                                     std::to_string(waveform.size()));
    }
    const auto power = spectrum::power_spectrum(waveform);
    const std::size_t fft_size = 2 * (power.size() - 1);
    return normalized(spectrum::bin_bands(power, fft_size, kSampleRate, edges()));
}

Fingerprint punctuation_fingerprint(char32_t codepoint)
{
    const std::uint64_t seed = kPunctNoiseDomain ^ (static_cast<std::uint64_t>(codepoint) * 0xD6E8FEB86659FD93ULL);
    Waveform w(kSamplesPerPhoneme);
    for (std::size_t n = 0; n < w.size(); ++n) w[n] = noise_sample(seed, n, kFricativeGain);
    return fingerprint(w);
}

Fingerprint oov_fingerprint(std::string_view lowercase_bytes)
{
    std::uint64_t state = detail::fnv1a64(lowercase_bytes);
    std::array<double, 16> v{};
    for (double& x : v) x = detail::unit_interval(detail::splitmix64(state));
    return normalized(v);
}

TokenFingerprint fingerprint_token(std::string_view surface, const PronunciationTable& table)
{
    if (surface.empty()) throw Error(ErrorCode::invalid_argument, "fingerprint_token: empty token");
    if (text::is_punctuation_token(surface)) {
        return {punctuation_fingerprint(*text::single_codepoint(surface)), {.punctuation = true}};
    }
    const std::string lower = text::to_lower_ascii(surface);
    if (const PhonemeSeq* phonemes = table.find(lower)) {
        return {fingerprint(synthesize(*phonemes)), {}};
    }
    return {oov_fingerprint(lower), {.oov_synthetic = true}};
}

TokenFingerprint FingerprintCache::get(std::string_view surface)
{
    const std::string key = text::to_lower_ascii(surface);
    {
        std::shared_lock lock(mutex_);
        if (const auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    // Computed outside the lock; racing writers produce identical values.
    const TokenFingerprint value = fingerprint_token(key, *table_);
    std::unique_lock lock(mutex_);
    return entries_.try_emplace(key, value).first->second;
}

std::size_t FingerprintCache::size() const
{
    std::shared_lock lock(mutex_);
    return entries_.size();
}

} // namespace ptm::phonetics
