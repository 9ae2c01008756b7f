// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include "support/corpus.hpp"
#include "support/paths.hpp"

#include <ptm/metrics.hpp>
#include <ptm_cli/cli.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace ptm;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Context {
    phonetics::PronunciationTable table;
    VocabIndex index;
    // The long stream shared by the plateau and latency criteria.
    std::vector<std::string> stream;
    MemoryTrace stream_trace;
};

Context& context()
{
    static Context c = [] {
        Context c;
        c.table = phonetics::load_dictionary(testing::dictionary_path()).table;
        c.index = VocabIndex::read(testing::index_path());
        return c;
    }();
    return c;
}

// Generator seeds: the stream and the prior's training text never share one.
constexpr std::uint64_t kStreamSeed = 20'260'417;
constexpr std::uint64_t kTrainSeed = 7;
constexpr std::size_t kStreamTokens = 20'000;
constexpr std::size_t kTrainTokens = 200'000;

phonetics::Fingerprint random_unit_force(std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    std::array<double, kDim> v;
    double n2 = 0;
    for (auto& x : v) {
        x = std::abs(g(rng));
        n2 += x * x;
    }
    phonetics::Fingerprint f;
    for (std::size_t i = 0; i < kDim; ++i) f.coords[i] = static_cast<float>(v[i] / std::sqrt(n2));
    return f;
}

Verdict drift_floor()
{
    const auto t0 = Clock::now();
    const auto r = RotationOperator::standard();
    const auto single = drift_stress<float>(r, 100'000);
    const auto dbl = drift_stress<double>(r, 100'000);
    const double t = seconds(t0);
    return {single.max_error <= 1e-5 && dbl.max_error <= 1e-11 && t < 10.0,
            fmt("single max_error=%.3g (<=1e-5), double max_error=%.3g (<=1e-11), %.2f s (<10 s)", single.max_error,
                dbl.max_error, t)};
}

Verdict round_trip_inversion()
{
    const auto r = RotationOperator::standard();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::pair<TorusState, ForceVector>> pairs(10'000);
    for (auto& [s, v] : pairs) {
        Coords<float> c;
        for (auto& x : c) x = reduce_mod1(static_cast<float>(u(rng)));
        s = TorusState(c);
        v = random_unit_force(rng);
    }
    const auto t0 = Clock::now();
    double worst = 0;
    for (const auto& [s, v] : pairs) {
        const auto rec = invert_step(r, evolve(r, s, v), s);
        for (std::size_t i = 0; i < kDim; ++i) {
            const double d = std::abs(double(rec[i]) - v[i]);
            worst = std::max(worst, std::min(d, 1.0 - d));
        }
    }
    const double t = seconds(t0);
    return {worst <= 1e-6 && t < 1.0, fmt("10000 pairs, max |dV|=%.3g (<=1e-6), %.3f s (<1 s)", worst, t)};
}

Verdict unicity()
{
    // Short sequences of real dictionary fingerprints.
    auto& ctx = context();
    const auto words = ctx.table.sorted_words();
    std::mt19937_64 rng(102);
    std::vector<phonetics::Fingerprint> pool;
    for (int i = 0; i < 500; ++i) {
        pool.push_back(phonetics::fingerprint_token(words[rng() % words.size()], ctx.table).fingerprint);
    }
    const auto r = RotationOperator::standard();
    auto draw = [&] {
        std::vector<std::size_t> s(1 + rng() % 4);
        for (auto& x : s) x = rng() % pool.size();
        return s;
    };
    auto same = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!(pool[a[i]] == pool[b[i]])) return false;
        }
        return true;
    };
    auto final_state = [&](const std::vector<std::size_t>& s) {
        TorusState st;
        for (auto i : s) st = evolve(r, st, pool[i]);
        return st;
    };
    std::size_t violations = 0, pairs = 0;
    double closest = 1e9;
    while (pairs < 10'000) {
        const auto a = draw(), b = draw();
        if (same(a, b)) continue;
        ++pairs;
        const double d = torus_distance(final_state(a), final_state(b));
        closest = std::min(closest, d);
        violations += d > 1e-4 ? 0 : 1;
    }
    return {violations == 0, fmt("%zu pairs, min distance=%.4g (>1e-4), violations=%zu", pairs, closest, violations)};
}

Verdict collision()
{
    const auto c = collision_probability(0.1, 1e6, 16);
    const bool ok = std::abs(c.v_spot / 2.35e-17 - 1) <= 0.01 && std::abs(c.p_collision / 1.175e-5 - 1) <= 0.01;
    return {ok, fmt("v_spot=%.6g (2.35e-17 +-1%%), p=%.6g (1.175e-5 +-1%%)", c.v_spot, c.p_collision)};
}

Verdict cycle_bound()
{
    const auto b = cycle_length_bound(24, 8);
    const BigInt expected = BigInt(1) << 192;
    const std::string s = b.str();
    return {b == expected && s.rfind("6277", 0) == 0,
            fmt("2^192 exact=%s, decimal=%.12s... (%zu digits)", b == expected ? "yes" : "no", s.c_str(), s.size())};
}

Verdict accounting()
{
    struct Case {
        std::uint64_t n, anchors;
        double reported;
    };
    const Case cases[] = {{335, 0, 3000.0}, {222, 65, 3.41}, {20'000, 4'539, 4.4}};
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        const auto m = account_memory(c.n, c.anchors, 192'000);
        const double rel = std::abs(m.net_compression / c.reported - 1);
        ok &= rel <= 0.03;
        detail += fmt("%s(N=%llu,A=%llu) %.2fx vs %.4gx [%.2f%%]", detail.empty() ? "" : "; ",
                      static_cast<unsigned long long>(c.n), static_cast<unsigned long long>(c.anchors),
                      m.net_compression, c.reported, 100 * rel);
    }
    return {ok, detail + " (<=3%)"};
}

Verdict clean_self_retrieval(std::vector<PositionLog>& logs)
{
    auto& ctx = context();
    const auto t0 = Clock::now();
    const auto tokens = tokenize(testing::read_file(testing::data_path("fixtures/valley_in_dictionary.txt")));
    phonetics::FingerprintCache cache(ctx.table);
    const auto enc = encode(tokens, {}, RotationOperator::standard(), cache);
    const UniformPrior prior;
    const auto rec = Decoder(enc.trace, ctx.index, prior, {}).reconstruct();
    const auto rep = audit(tokens, rec.tokens, enc.trace, cache, {}, rec.logs);
    const double t = seconds(t0);
    std::size_t oov = 0;
    for (const auto& r : enc.records) oov += r.flags.oov_synthetic ? 1 : 0;
    logs.insert(logs.end(), rec.logs.begin(), rec.logs.end());
    const bool ok = tokens.size() >= 300 && oov == 0 && rep.anchor_count == 0 && rep.accuracy >= 0.8 &&
                    rep.errors.other == 0 && rep.errors.unknown_marker == 0 && t < 60.0;
    return {ok, fmt("%zu tokens, %zu oov, accuracy=%.2f%% (>=80%%), homophone=%zu drift=%zu unknown=%zu other=%zu, "
                    "%.1f s (<60 s)",
                    tokens.size(), oov, 100 * rep.accuracy, rep.errors.homophone, rep.errors.phonetic_drift,
                    rep.errors.unknown_marker, rep.errors.other, t)};
}

Verdict plateau(std::vector<PositionLog>& logs)
{
    auto& ctx = context();
    const auto t0 = Clock::now();
    const std::string train = testing::generate_corpus(kTrainSeed, kTrainTokens);
    ctx.stream = tokenize(testing::generate_corpus(kStreamSeed, kStreamTokens));
    AnchorPolicy policy;
    policy.target_drop_rate = 0.75;
    const auto flags = select_anchors(ctx.stream, policy, CorpusStats::from_text(train), &ctx.table);
    phonetics::FingerprintCache cache(ctx.table);
    const auto enc = encode(ctx.stream, flags, RotationOperator::standard(), cache);
    ctx.stream_trace = enc.trace;
    const auto prior = NgramPrior::train_text(train);
    const auto rec = Decoder(enc.trace, ctx.index, prior, {}).reconstruct();
    AuditOptions opts;
    opts.window_size = 2000;
    const auto rep = audit(ctx.stream, rec.tokens, enc.trace, cache, opts, rec.logs);
    logs.insert(logs.end(), rec.logs.begin(), rec.logs.end());
    if (rep.windows.size() != 10) return {false, fmt("expected 10 windows of 2000, got %zu", rep.windows.size())};
    const double early = rep.windows[1]; // positions 2000..3999, after warm-up
    const double late = rep.windows.back();
    const double gap = 100 * std::abs(late - early);
    return {gap <= 5.0 && ctx.stream.size() == kStreamTokens,
            fmt("%zu tokens, %zu anchors (drop %.2f%%), early[2k,4k)=%.2f%% late[18k,20k)=%.2f%% gap=%.2f pp (<=5), "
                "overall=%.2f%%, %.1f s",
                ctx.stream.size(), rep.anchor_count, 100 * rep.drop_rate, 100 * early, 100 * late, gap,
                100 * rep.accuracy, seconds(t0))};
}

Verdict constant_access()
{
    const auto& ctx = context();
    if (ctx.stream_trace.token_count() != kStreamTokens) return {false, "20k trace unavailable"};
    const std::uint64_t n = ctx.stream_trace.token_count();
    const std::vector<std::uint64_t> positions{100, 10'000, 10 * n / 11, 19'000};
    const auto rep = latency_bench(ctx.stream_trace, ctx.index, positions, 60);
    std::string per;
    for (const auto& d : rep.decode) {
        per += fmt("%st=%llu %.0f us", per.empty() ? "" : ", ", static_cast<unsigned long long>(d.position),
                   d.stats.median_us);
    }
    return {rep.depth_ratio < 2.0 && rep.encode_per_token.median_us < 100.0,
            fmt("depth_ratio=%.3f (<2.0) [%s], encode median=%.2f us p99=%.2f us (<100 us)", rep.depth_ratio,
                per.c_str(), rep.encode_per_token.median_us, rep.encode_per_token.p99_us)};
}

Verdict consensus_algebra(const std::vector<PositionLog>& logs)
{
    // Every log from the default-alpha runs, then the degenerate weights.
    double worst = 0;
    std::size_t candidates = 0;
    for (const auto& log : logs) {
        for (const auto& c : log.candidates) {
            worst = std::max(worst, std::abs(c.p_total - (0.4 * c.p_prior + 0.6 * c.p_signal)));
            ++candidates;
        }
    }

    auto& ctx = context();
    const auto tokens = tokenize(testing::read_file(testing::data_path("fixtures/scifi_bridge.txt")));
    phonetics::FingerprintCache cache(ctx.table);
    const auto enc = encode(tokens, {}, RotationOperator::standard(), cache);
    const auto prior = NgramPrior::train_text(testing::read_file(testing::data_path("fixtures/valley_of_the_kings.txt")));
    std::size_t mismatches = 0, checked = 0;
    for (const double alpha : {1.0, 0.0}) {
        DecoderConfig cfg;
        cfg.alpha = alpha;
        const auto rec = Decoder(enc.trace, ctx.index, prior, cfg).reconstruct();
        for (const auto& log : rec.logs) {
            if (log.outcome == Outcome::unknown || log.outcome == Outcome::anchor_hit) continue;
            std::vector<double> p;
            std::vector<std::string> s;
            for (const auto& c : log.candidates) {
                p.push_back(alpha == 1.0 ? c.p_prior : c.p_signal);
                s.push_back(c.surface);
                worst = std::max(worst, std::abs(c.p_total - (alpha * c.p_prior + (1 - alpha) * c.p_signal)));
            }
            ++checked;
            mismatches += log.chosen == s[argmax_lexicographic(p, s)] ? 0 : 1;
        }
    }
    return {worst <= 1e-9 && mismatches == 0 && candidates > 0 && checked > 0,
            fmt("%zu logged candidates, max |p_total - (0.4 p_prior + 0.6 p_signal)|=%.3g (<=1e-9); "
                "alpha=1/alpha=0 argmax mismatches=%zu of %zu",
                candidates, worst, mismatches, checked)};
}

Verdict determinism()
{
    const fs::path root = fs::temp_directory_path() / "ptm_acceptance";
    std::string outputs[2];
    for (int i = 0; i < 2; ++i) {
        const fs::path dir = root / ("run" + std::to_string(i));
        fs::remove_all(dir);
        cli::RunConfig cfg;
        cfg.dictionary = testing::dictionary_path();
        cfg.index = testing::index_path();
        cfg.corpus = testing::data_path("fixtures/valley_of_the_kings.txt");
        cfg.prior = cli::PriorKind::ngram;
        cfg.output_dir = dir.string();
        std::ostringstream sink;
        const int code =
            cli::cmd_audit(testing::data_path("fixtures/scifi_bridge.txt"), cfg, cli::AuditOutputs{true, true}, sink);
        if (code != 0) return {false, fmt("cmd_audit exited %d", code)};
        for (const char* f : {"audit.json", "audit.txt", "windows.csv", "reconstructed.txt", "positions.csv"}) {
            outputs[i] += testing::read_file((dir / f).string());
        }
        outputs[i] += testing::read_file((dir / "trace.ptmt").string());
    }
    return {outputs[0] == outputs[1] && !outputs[0].empty(),
            fmt("two cmd_audit runs, %zu bytes of reports compared, identical=%s (timestamps live in audit.meta.json)",
                outputs[0].size(), outputs[0] == outputs[1] ? "yes" : "no")};
}

} // namespace

int main()
{
    std::vector<PositionLog> logs;
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"drift floor", drift_floor},
        {"round-trip inversion", round_trip_inversion},
        {"unicity", unicity},
        {"collision calculator", collision},
        {"cycle bound", cycle_bound},
        {"accounting reproduction", accounting},
        {"clean-signal self-retrieval", [&] { return clean_self_retrieval(logs); }},
        {"plateau stability", [&] { return plateau(logs); }},
        {"O(1) access", constant_access},
        {"consensus algebra", [&] { return consensus_algebra(logs); }},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        failed += v.pass ? 0 : 1;
        std::printf("[%s] %2zu %-28s %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
