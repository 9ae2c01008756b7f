#include "support/paths.hpp"

#include <ptm/error.hpp>
#include <ptm/memory.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace ptm;
using Tokens = std::vector<std::string>;

namespace {

phonetics::PronunciationTable small_table()
{
    std::istringstream in("the  DH AH0\n"
                          "cat  K AE1 T\n"
                          "sat  S AE1 T\n"
                          "on  AA1 N\n"
                          "mat  M AE1 T\n"
                          "dog  D AO1 G\n"
                          "ran  R AE1 N\n"
                          "home  HH OW1 M\n");
    return phonetics::parse_dictionary(in).table;
}

MemoryTrace sample_trace()
{
    static const auto table = small_table();
    phonetics::FingerprintCache cache(table);
    const Tokens toks{"The", "cat", "sat", "on", "the", "mat", ",", "Zanzibar", "ran", "home", "."};
    std::vector<bool> flags(toks.size(), false);
    flags[1] = flags[7] = true;
    return encode(toks, flags, RotationOperator::standard(), cache).trace;
}

ErrorCode read_error(std::string_view bytes)
{
    try {
        deserialize_trace(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "trace accepted";
    return ErrorCode::invalid_argument;
}

} // namespace

TEST(Tokenize, Examples)
{
    EXPECT_EQ(tokenize("Oh, please!"), (Tokens{"Oh", ",", "please", "!"}));
    EXPECT_EQ(tokenize("twenty-four hours"), (Tokens{"twenty", "four", "hours"}));
    EXPECT_EQ(tokenize(""), Tokens{});
    EXPECT_EQ(tokenize("  \n\t "), Tokens{});
    EXPECT_EQ(tokenize("\"Wait...\" she said."), (Tokens{"\"", "Wait", ".", ".", ".", "\"", "she", "said", "."}));
    EXPECT_EQ(tokenize("don't"), Tokens{"don't"});
    EXPECT_EQ(tokenize("\xE2\x80\x9Chi\xE2\x80\x9D"), (Tokens{"\xE2\x80\x9C", "hi", "\xE2\x80\x9D"}));
}

TEST(Tokenize, Numerals)
{
    EXPECT_TRUE(is_numeral("1922"));
    EXPECT_TRUE(is_numeral("3,000"));
    EXPECT_TRUE(is_numeral("4.5"));
    EXPECT_FALSE(is_numeral("4th"));
    EXPECT_FALSE(is_numeral(","));
    EXPECT_FALSE(is_numeral(""));
}

TEST(CorpusStats, SurprisalAndImportance)
{
    const auto stats = CorpusStats::from_text("the cat and the dog and the bird .");
    EXPECT_EQ(stats.total(), 8U); // punctuation is not counted
    EXPECT_EQ(stats.vocabulary(), 5U);
    EXPECT_EQ(stats.count("the"), 3U);
    // -log2((3 + 1) / (8 + 5 + 1))
    EXPECT_NEAR(stats.surprisal("the"), -std::log2(4.0 / 14.0), 1e-12);
    EXPECT_NEAR(stats.surprisal("pharaoh"), stats.max_surprisal(), 1e-12);
    EXPECT_LT(importance("The", stats), importance("cat", stats));
    EXPECT_EQ(importance(",", stats), 0.0);
    EXPECT_EQ(importance("pharaoh", stats), stats.max_surprisal());
}

TEST(Anchors, TargetCount)
{
    EXPECT_EQ(target_anchor_count(10, 0.5), 5U);
    EXPECT_EQ(target_anchor_count(335, 1.0), 0U);
    EXPECT_EQ(target_anchor_count(222, 0.7072), 65U);
    EXPECT_EQ(target_anchor_count(335, 0.7254), 92U);
    EXPECT_EQ(target_anchor_count(7, 0.0), 7U);
}

TEST(Anchors, TargetRatePicksRarestFirstTiesEarlier)
{
    const Tokens toks{"the", "cat", "the", "dog", "the", "emu", "."};
    const auto stats = CorpusStats::from_text("the the the the cat dog");
    AnchorPolicy p;
    p.target_drop_rate = 1.0 - 2.0 / 7.0;
    const auto flags = select_anchors(toks, p, stats);
    // emu is unseen (maximum surprisal); cat and dog tie, cat is earlier.
    EXPECT_EQ(flags, (std::vector<bool>{false, true, false, false, false, true, false}));
}

TEST(Anchors, ThresholdMode)
{
    const Tokens toks{"the", "cat", "the", "emu"};
    const auto stats = CorpusStats::from_text("the the the the cat");
    AnchorPolicy p;
    p.mode = AnchorPolicy::Mode::threshold;
    p.surprisal_threshold = stats.surprisal("cat");
    EXPECT_EQ(select_anchors(toks, p, stats), (std::vector<bool>{false, true, false, true}));
}

TEST(Anchors, ForcedAnchorsCountTowardQuota)
{
    const auto table = small_table();
    const Tokens toks{"the", "cat", "1922", "sat", "Zanzibar", "on"};
    const auto stats = CorpusStats::from_text("the cat sat on");
    AnchorPolicy p;
    p.target_drop_rate = 0.5;
    p.always_anchor_oov = true;
    p.always_anchor_numerals = true;
    const auto flags = select_anchors(toks, p, stats, &table);
    EXPECT_EQ(std::count(flags.begin(), flags.end(), true), 3);
    EXPECT_TRUE(flags[2]);
    EXPECT_TRUE(flags[4]);
}

TEST(Anchors, PolicyValidation)
{
    AnchorPolicy p;
    p.target_drop_rate = 1.5;
    EXPECT_THROW(p.validate(), Error);
    p.target_drop_rate = 0.72;
    p.surprisal_threshold = std::nan("");
    EXPECT_THROW(p.validate(), Error);
}

TEST(Anchors, FixtureDropRates)
{
    const auto scifi = tokenize(ptm::testing::read_file(ptm::testing::data_path("fixtures/scifi_bridge.txt")));
    const auto stats = CorpusStats::from_tokens(scifi);
    AnchorPolicy p;
    p.target_drop_rate = 0.7072;
    const auto flags = select_anchors(scifi, p, stats);
    EXPECT_EQ(std::count(flags.begin(), flags.end(), true), 65);

    const auto valley = tokenize(ptm::testing::read_file(ptm::testing::data_path("fixtures/valley_of_the_kings.txt")));
    EXPECT_EQ(valley.size(), 335U);
    p.target_drop_rate = 1.0;
    const auto none = select_anchors(valley, p, CorpusStats::from_tokens(valley));
    EXPECT_EQ(std::count(none.begin(), none.end(), true), 0);
}

TEST(Encode, EmptyAndSingleToken)
{
    const auto table = small_table();
    phonetics::FingerprintCache cache(table);
    const auto r = RotationOperator::standard();

    const auto empty = encode(Tokens{}, {}, r, cache);
    EXPECT_EQ(empty.trace.token_count(), 0U);
    ASSERT_EQ(empty.trace.states.size(), 1U);
    EXPECT_EQ(empty.trace.states[0], TorusState::zero());

    const auto one = encode(Tokens{"cat"}, {}, r, cache);
    ASSERT_EQ(one.trace.states.size(), 2U);
    const auto f = cache.get("cat").fingerprint;
    EXPECT_EQ(one.trace.states[1], evolve(r, TorusState::zero(), f));
    const auto rec = invert_step(r, one.trace.states[1], one.trace.states[0]);
    for (std::size_t i = 0; i < kDim; ++i) EXPECT_NEAR(rec[i], f[i], 1e-6);
}

TEST(Encode, TrajectoryConsistencyAndRecords)
{
    const auto table = small_table();
    phonetics::FingerprintCache cache(table);
    const auto r = RotationOperator::standard();
    const Tokens toks{"The", "cat", "sat", "on", "the", "mat", ",", "Zanzibar", "."};
    std::vector<bool> flags(toks.size(), false);
    flags[7] = true;
    const auto out = encode(toks, flags, r, cache);
    ASSERT_EQ(out.records.size(), toks.size());
    for (std::size_t t = 1; t <= toks.size(); ++t) {
        const auto v = invert_step(r, out.trace.states[t], out.trace.states[t - 1]);
        const auto f = cache.get(toks[t - 1]).fingerprint;
        for (std::size_t i = 0; i < kDim; ++i) {
            const double d = std::abs(double(v[i]) - f[i]);
            EXPECT_LT(std::min(d, 1.0 - d), 1e-6);
        }
        EXPECT_EQ(out.records[t - 1].position, t - 1);
    }
    EXPECT_TRUE(out.records[6].flags.punctuation);
    EXPECT_TRUE(out.records[7].flags.oov_synthetic);
    ASSERT_EQ(out.trace.anchors.size(), 1U);
    EXPECT_EQ(out.trace.anchors[0], (Anchor{7, "Zanzibar"}));
    EXPECT_EQ(*out.trace.anchor_at(7), "Zanzibar");
    EXPECT_EQ(out.trace.anchor_at(6), nullptr);
    EXPECT_THROW(encode(toks, std::vector<bool>(2, true), r, cache), Error);
}

TEST(Encode, DistinctSequencesEndApart)
{
    // Short random sequences over dictionary words and hashed nonsense words.
    const auto table = small_table();
    phonetics::FingerprintCache cache(table);
    const auto r = RotationOperator::standard();
    const Tokens pool{"the", "cat", "sat", "on", "mat", "dog", "ran", "home", ",", ".", "qix", "vorp", "blen", "trask"};
    std::mt19937_64 rng(12);
    auto draw = [&] {
        Tokens s(1 + rng() % 20);
        for (auto& t : s) t = pool[rng() % pool.size()];
        return s;
    };
    double closest = 1e9;
    int compared = 0;
    while (compared < 1000) {
        const auto a = draw(), b = draw();
        if (a == b) continue;
        ++compared;
        const auto sa = encode(a, {}, r, cache).trace.states.back();
        const auto sb = encode(b, {}, r, cache).trace.states.back();
        closest = std::min(closest, torus_distance(sa, sb));
    }
    EXPECT_GT(closest, 1e-4);
}

TEST(TraceFormat, RoundTripAndExactSize)
{
    const auto trace = sample_trace();
    const std::string bytes = serialize_trace(trace);
    EXPECT_EQ(bytes.substr(0, 4), "PTMT");
    std::size_t anchor_bytes = 0;
    for (const auto& a : trace.anchors) anchor_bytes += 8 + 2 + a.surface.size();
    EXPECT_EQ(bytes.size(), kTraceHeaderBytes + anchor_bytes + trace.signal_bytes() + 4);
    EXPECT_EQ(trace.signal_bytes(), (trace.token_count() + 1) * 16 * 4);
    EXPECT_EQ(deserialize_trace(bytes), trace);
}

TEST(TraceFormat, FileRoundTrip)
{
    const auto trace = sample_trace();
    const std::string path = ::testing::TempDir() + "/sample.ptmt";
    write_trace(trace, path);
    EXPECT_EQ(read_trace(path), trace);
    try {
        read_trace(::testing::TempDir() + "/missing.ptmt");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::io_error);
    }
}

TEST(TraceFormat, DistinctErrors)
{
    const std::string bytes = serialize_trace(sample_trace());

    std::string magic = bytes;
    magic.replace(0, 4, "XXXX");
    EXPECT_EQ(read_error(magic), ErrorCode::bad_magic);

    std::string version = bytes;
    version[4] = 9;
    EXPECT_EQ(read_error(version), ErrorCode::version_mismatch);

    EXPECT_EQ(read_error(bytes.substr(0, bytes.size() - 1)), ErrorCode::truncated);
    EXPECT_EQ(read_error(bytes.substr(0, 10)), ErrorCode::truncated);
    EXPECT_EQ(read_error(""), ErrorCode::truncated);

    std::string flipped = bytes;
    flipped[bytes.size() - 20] ^= 0x01;
    EXPECT_EQ(read_error(flipped), ErrorCode::checksum_mismatch);

    EXPECT_EQ(read_error(bytes + "tail"), ErrorCode::corrupt);
}

TEST(TraceFormat, EmptyTrace)
{
    const MemoryTrace empty;
    const auto back = deserialize_trace(serialize_trace(empty));
    EXPECT_EQ(back, empty);
    EXPECT_EQ(back.token_count(), 0U);
}
