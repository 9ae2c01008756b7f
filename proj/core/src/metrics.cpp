#include "ptm/metrics.hpp"

#include "ptm/error.hpp"
#include "ptm/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace ptm {
namespace {

using Json = nlohmann::ordered_json;

double cosine(const phonetics::Fingerprint& a, const phonetics::Fingerprint& b)
{
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < kDim; ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

std::string shortest(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string fmt(const char* format, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

double megabytes(std::uint64_t bytes)
{
    return static_cast<double>(bytes) / 1e6;
}

} // namespace

std::string_view to_string(ErrorClass c) noexcept
{
    switch (c) {
    case ErrorClass::exact: return "exact";
    case ErrorClass::homophone: return "homophone";
    case ErrorClass::phonetic_drift: return "phonetic_drift";
    case ErrorClass::unknown_marker: return "unknown_marker";
    case ErrorClass::other: return "other";
    }
    return "?";
}

ErrorClass classify_miss(double cos) noexcept
{
    if (cos >= kHomophoneCosine) return ErrorClass::homophone;
    if (cos >= kDriftCosine) return ErrorClass::phonetic_drift;
    return ErrorClass::other;
}

MemoryAccounting account_memory(std::uint64_t token_count, std::uint64_t anchor_count, std::uint64_t kv_bytes_per_token)
{
    MemoryAccounting m;
    m.baseline_bytes = token_count * kv_bytes_per_token;
    m.sparse_anchor_bytes = anchor_count * kv_bytes_per_token;
    m.signal_bytes = (token_count + 1) * kDim * sizeof(float);
    m.net_compression = static_cast<double>(m.baseline_bytes) /
                        static_cast<double>(m.sparse_anchor_bytes + m.signal_bytes);
    if (anchor_count == 0) {
        m.signal_to_state_ratio = static_cast<double>(m.baseline_bytes) / static_cast<double>(m.signal_bytes);
    }
    return m;
}

std::vector<double> windowed_accuracy(const std::vector<bool>& matches, std::size_t window_size)
{
    if (window_size == 0) throw Error(ErrorCode::invalid_argument, "windowed_accuracy: window size must be >= 1");
    std::vector<double> out;
    for (std::size_t start = 0; start < matches.size(); start += window_size) {
        const std::size_t end = std::min(matches.size(), start + window_size);
        const auto hits = std::count(matches.begin() + static_cast<std::ptrdiff_t>(start),
                                     matches.begin() + static_cast<std::ptrdiff_t>(end), true);
        out.push_back(static_cast<double>(hits) / static_cast<double>(end - start));
    }
    return out;
}

AuditReport audit(std::span<const std::string> original, std::span<const std::string> reconstructed,
                  const MemoryTrace& trace, phonetics::FingerprintCache& fingerprints, const AuditOptions& options,
                  std::span<const PositionLog> logs)
{
    if (original.size() != reconstructed.size()) {
        throw Error(ErrorCode::invalid_argument, "audit: " + std::to_string(original.size()) + " original vs " +
                                                     std::to_string(reconstructed.size()) + " reconstructed tokens");
    }
    if (trace.token_count() != original.size()) {
        throw Error(ErrorCode::invalid_argument, "audit: trace length does not match the token sequence");
    }
    AuditReport r;
    r.token_count = original.size();
    r.anchor_count = trace.anchors.size();
    r.kv_bytes_per_token = options.kv_bytes_per_token;
    r.window_size = options.window_size;

    std::vector<bool> matches(r.token_count, false);
    for (std::size_t i = 0; i < r.token_count; ++i) {
        const bool anchor = trace.anchor_at(i) != nullptr;
        const bool match = anchor ? original[i] == reconstructed[i]
                                  : text::to_lower_ascii(original[i]) == text::to_lower_ascii(reconstructed[i]);
        matches[i] = match;
        if (match) {
            ++r.exact_matches;
            continue;
        }
        Miss miss{i, original[i], reconstructed[i], ErrorClass::unknown_marker, 0.0, anchor};
        if (reconstructed[i] != options.unknown_marker) {
            miss.cosine = cosine(fingerprints.get(original[i]).fingerprint,
                                 fingerprints.get(reconstructed[i]).fingerprint);
            miss.cls = classify_miss(miss.cosine);
        }
        switch (miss.cls) {
        case ErrorClass::homophone: ++r.errors.homophone; break;
        case ErrorClass::phonetic_drift: ++r.errors.phonetic_drift; break;
        case ErrorClass::unknown_marker: ++r.errors.unknown_marker; break;
        default: ++r.errors.other; break;
        }
        r.misses.push_back(std::move(miss));
    }
    // An empty stream retains nothing and loses nothing.
    r.drop_rate = r.token_count == 0 ? 1.0
                                     : 1.0 - static_cast<double>(r.anchor_count) / static_cast<double>(r.token_count);
    r.accuracy = r.token_count == 0 ? 1.0
                                    : static_cast<double>(r.exact_matches) / static_cast<double>(r.token_count);
    r.memory = account_memory(r.token_count, r.anchor_count, options.kv_bytes_per_token);
    r.windows = windowed_accuracy(matches, options.window_size);
    for (const auto& log : logs) {
        ++r.outcomes[static_cast<std::size_t>(log.outcome)];
        r.degraded_positions += log.prior_degraded ? 1 : 0;
    }
    return r;
}

CollisionEstimate collision_probability(double epsilon, double n_tokens, unsigned dims)
{
    if (dims == 0 || dims % 2 != 0) throw Error(ErrorCode::invalid_argument, "collision: dims must be even and > 0");
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw Error(ErrorCode::invalid_argument, "collision: epsilon must be in (0, 0.5)");
    if (!(n_tokens >= 0.0)) throw Error(ErrorCode::invalid_argument, "collision: n must be >= 0");
    const unsigned half = dims / 2;
    double factorial = 1.0;
    for (unsigned i = 2; i <= half; ++i) factorial *= i;
    CollisionEstimate out;
    out.v_spot = std::pow(std::numbers::pi, half) / factorial * std::pow(epsilon, dims);
    out.p_collision = -std::expm1(-n_tokens * n_tokens * out.v_spot / 2.0);
    return out;
}

double drift_bound(double t, double machine_epsilon)
{
    if (!(t >= 0.0)) throw Error(ErrorCode::invalid_argument, "drift_bound: t must be >= 0");
    return std::sqrt(t) * machine_epsilon;
}

BigInt cycle_length_bound(unsigned significand_bits, unsigned n_rotors)
{
    if (significand_bits == 0 || n_rotors == 0) {
        throw Error(ErrorCode::invalid_argument, "cycle_length_bound: arguments must be positive");
    }
    BigInt one = 1;
    return one << (significand_bits * n_rotors);
}

double percentile(std::vector<double> sample, double p)
{
    if (sample.empty()) return 0.0;
    std::sort(sample.begin(), sample.end());
    const double rank = std::ceil(p / 100.0 * static_cast<double>(sample.size()));
    const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(sample.size()))) - 1;
    return sample[idx];
}

LatencyReport latency_bench(const MemoryTrace& trace, const VocabIndex& vocab, std::span<const std::uint64_t> positions,
                            std::size_t repetitions, const DecoderConfig& config)
{
    using Clock = std::chrono::steady_clock;
    if (repetitions == 0) throw Error(ErrorCode::invalid_argument, "latency_bench: repetitions must be >= 1");
    if (positions.empty()) throw Error(ErrorCode::invalid_argument, "latency_bench: no positions given");
    for (auto t : positions) {
        if (t < 1 || t > trace.token_count()) {
            throw Error(ErrorCode::invalid_argument, "latency_bench: position " + std::to_string(t) + " out of range");
        }
    }
    const UniformPrior prior;
    const Decoder decoder(trace, vocab, prior, config);
    const RotationOperator rotation = trace.rotation();
    LatencyReport out;
    out.repetitions = repetitions;

    // Manifold update only: replay each step's recovered force vector.
    const std::size_t steps = std::min<std::size_t>(trace.token_count(), 4096);
    if (steps > 0) {
        std::vector<ForceVector> forces(steps);
        for (std::size_t t = 0; t < steps; ++t) forces[t] = invert_step(rotation, trace.states[t + 1], trace.states[t]);
        std::vector<double> per_token;
        per_token.reserve(repetitions);
        volatile float sink = 0.0f;
        for (std::size_t rep = 0; rep < repetitions; ++rep) {
            TorusState s = TorusState::zero();
            const auto t0 = Clock::now();
            for (std::size_t t = 0; t < steps; ++t) s = evolve(rotation, s, forces[t]);
            const auto t1 = Clock::now();
            sink = sink + s[0];
            per_token.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count() / static_cast<double>(steps));
        }
        out.encode_per_token = {percentile(per_token, 50), percentile(per_token, 99)};
    }

    for (auto t : positions) {
        (void)decoder.decode_bridge(t, {});
        std::vector<double> us;
        us.reserve(repetitions);
        for (std::size_t rep = 0; rep < repetitions; ++rep) {
            const auto t0 = Clock::now();
            (void)decoder.decode_bridge(t, {});
            const auto t1 = Clock::now();
            us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
        }
        out.decode.push_back({t, {percentile(us, 50), percentile(us, 99)}});
    }
    const auto [lo, hi] = std::minmax_element(out.decode.begin(), out.decode.end(),
                                              [](const auto& a, const auto& b) { return a.position < b.position; });
    out.depth_ratio = lo->stats.median_us > 0.0 ? hi->stats.median_us / lo->stats.median_us : 0.0;
    return out;
}

std::string audit_json(const AuditReport& r, std::string_view config_json)
{
    Json doc;
    doc["schema_version"] = kAuditSchemaVersion;
    doc["config"] = Json::parse(config_json);
    Json rep;
    rep["token_count"] = r.token_count;
    rep["anchor_count"] = r.anchor_count;
    rep["drop_rate"] = r.drop_rate;
    rep["exact_matches"] = r.exact_matches;
    rep["accuracy"] = r.accuracy;
    rep["errors"] = {{"homophone", r.errors.homophone},
                     {"phonetic_drift", r.errors.phonetic_drift},
                     {"unknown_marker", r.errors.unknown_marker},
                     {"other", r.errors.other}};
    rep["memory"] = {{"kv_bytes_per_token", r.kv_bytes_per_token},
                     {"baseline_bytes", r.memory.baseline_bytes},
                     {"sparse_anchor_bytes", r.memory.sparse_anchor_bytes},
                     {"signal_bytes", r.memory.signal_bytes},
                     {"net_compression", r.memory.net_compression},
                     {"signal_to_state_ratio", r.memory.signal_to_state_ratio}};
    Json outcomes;
    for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
        outcomes[std::string(to_string(static_cast<Outcome>(i)))] = r.outcomes[i];
    }
    rep["outcomes"] = outcomes;
    rep["prior_degraded_positions"] = r.degraded_positions;
    rep["window_size"] = r.window_size;
    rep["windows"] = r.windows;
    Json misses = Json::array();
    for (const auto& m : r.misses) {
        misses.push_back({{"position", m.position},
                          {"original", m.original},
                          {"reconstructed", m.reconstructed},
                          {"class", to_string(m.cls)},
                          {"cosine", m.cosine},
                          {"anchor", m.anchor}});
    }
    rep["misses"] = misses;
    doc["report"] = rep;
    return doc.dump(2) + "\n";
}

std::string audit_text(std::string_view report_json)
{
    const Json doc = Json::parse(report_json);
    const Json& r = doc.at("report");
    const Json& m = r.at("memory");
    const auto n = r.at("token_count").get<std::uint64_t>();
    const auto kv = m.at("kv_bytes_per_token").get<std::uint64_t>();
    const std::string rule(60, '=');
    const std::string thin(60, '-');

    std::string out;
    auto line = [&out](const std::string& s) { out += s + "\n"; };
    line(rule);
    line(" RECONSTRUCTION AUDIT");
    line(rule);
    line(" Tokens               : " + std::to_string(n));
    line(" Anchors retained     : " + std::to_string(r.at("anchor_count").get<std::uint64_t>()));
    line(" Drop rate            : " + fmt("%.2f%%", 100.0 * r.at("drop_rate").get<double>()));
    line(" Exact matches        : " + std::to_string(r.at("exact_matches").get<std::uint64_t>()));
    line(" Accuracy             : " + fmt("%.2f%%", 100.0 * r.at("accuracy").get<double>()));
    line(thin);
    line(" ERROR CLASSES");
    for (const auto& [name, count] : r.at("errors").items()) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "   %-18s : %llu", name.c_str(),
                      static_cast<unsigned long long>(count.get<std::uint64_t>()));
        line(buf);
    }
    line(" DECODE OUTCOMES");
    for (const auto& [name, count] : r.at("outcomes").items()) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "   %-18s : %llu", name.c_str(),
                      static_cast<unsigned long long>(count.get<std::uint64_t>()));
        line(buf);
    }
    line(thin);
    line(" MEMORY FOOTPRINT BREAKDOWN (1 MB = 10^6 bytes)");
    line(" Baseline KV cache    : " + fmt("%.2f MB", megabytes(m.at("baseline_bytes").get<std::uint64_t>())) + " (" +
         std::to_string(n) + " tokens x " + std::to_string(kv) + " B)");
    line(" Sparse anchor cache  : " + fmt("%.2f MB", megabytes(m.at("sparse_anchor_bytes").get<std::uint64_t>())));
    line(" Full phonetic signal : " + fmt("%.3f MB", megabytes(m.at("signal_bytes").get<std::uint64_t>())) + " (" +
         std::to_string(n + 1) + " vectors x 16-dim x 4B)");
    line(" Net compression      : " + fmt("%.2fx", m.at("net_compression").get<double>()));
    if (r.at("anchor_count").get<std::uint64_t>() == 0) {
        line(" Signal-to-KV ratio   : " + fmt("%.0fx", m.at("signal_to_state_ratio").get<double>()));
    }
    line(thin);
    const auto& misses = r.at("misses");
    line(" MISSES (" + std::to_string(misses.size()) + ")");
    for (const auto& miss : misses) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "   #%-6llu %-16s -> %-16s %-14s cos=%.4f",
                      static_cast<unsigned long long>(miss.at("position").get<std::uint64_t>()),
                      miss.at("original").get<std::string>().c_str(),
                      miss.at("reconstructed").get<std::string>().c_str(),
                      miss.at("class").get<std::string>().c_str(), miss.at("cosine").get<double>());
        line(buf);
    }
    line(rule);
    return out;
}

std::string windows_csv(const AuditReport& report)
{
    std::string out = "window,start,end,accuracy\n";
    for (std::size_t w = 0; w < report.windows.size(); ++w) {
        const std::size_t start = w * report.window_size;
        const std::size_t end = std::min(report.token_count, start + report.window_size);
        out += std::to_string(w) + "," + std::to_string(start) + "," + std::to_string(end) + "," +
               shortest(report.windows[w]) + "\n";
    }
    return out;
}

std::string drift_csv(const DriftReport& report)
{
    std::string out = "steps,error\n";
    for (const auto& c : report.checkpoints) out += std::to_string(c.steps) + "," + shortest(c.error) + "\n";
    return out;
}

} // namespace ptm
