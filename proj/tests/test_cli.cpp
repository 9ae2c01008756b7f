#include "support/paths.hpp"

#include <ptm/error.hpp>
#include <ptm_cli/cli.hpp>

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ptm;
using namespace ptm::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run ptm_run(std::vector<std::string> args)
{
    args.insert(args.begin(), "ptm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::path(::testing::TempDir()) / "ptm_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& s)
{
    std::ofstream(p) << s;
}

} // namespace

TEST(RunConfig, JsonRoundTrip)
{
    RunConfig c;
    c.dictionary = "d.dict";
    c.anchors.target_drop_rate = 0.5;
    c.anchors.mode = AnchorPolicy::Mode::threshold;
    c.anchors.surprisal_threshold = 7.5;
    c.decoder.alpha = 0.25;
    c.prior = PriorKind::ngram;
    c.remote.timeout = std::chrono::milliseconds(1500);
    c.window = 50;
    const auto back = RunConfig::from_json(c.to_json());
    EXPECT_EQ(back.to_json(), c.to_json());
    EXPECT_EQ(back.anchors.mode, AnchorPolicy::Mode::threshold);
    EXPECT_EQ(back.anchors.surprisal_threshold, 7.5);
    EXPECT_EQ(back.remote.timeout.count(), 1500);
    EXPECT_EQ(back.prior, PriorKind::ngram);

    // Infinite thresholds travel as null.
    const auto doc = nlohmann::json::parse(RunConfig{}.to_json());
    EXPECT_TRUE(doc["anchors"]["surprisal_threshold"].is_null());
    EXPECT_FALSE(doc.contains("output_dir"));
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues)
{
    EXPECT_THROW(RunConfig::from_json(R"({"dictionnary": "x"})"), Error);
    EXPECT_THROW(RunConfig::from_json(R"({"decoder": {"beta": 1}})"), Error);
    EXPECT_THROW(RunConfig::from_json(R"({"prior": {"kind": "gpt"}})"), Error);
    EXPECT_THROW(RunConfig::from_json(R"({"window": "big"})"), Error);
    EXPECT_THROW(RunConfig::from_json("{"), Error);
    try {
        RunConfig::load("/nonexistent/config.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::io_error);
    }
}

TEST(RunConfig, EnvironmentOverridesEndpoint)
{
    ::setenv(kEndpointEnv, "http://127.0.0.1:9/x", 1);
    RunConfig c;
    c.apply_environment();
    ::unsetenv(kEndpointEnv);
    EXPECT_EQ(c.remote.endpoint, "http://127.0.0.1:9/x");
}

TEST(ExitCodes, Mapping)
{
    EXPECT_EQ(exit_code_for(ErrorCode::io_error), kBadInput);
    EXPECT_EQ(exit_code_for(ErrorCode::invalid_argument), kBadInput);
    EXPECT_EQ(exit_code_for(ErrorCode::bad_magic), kFormat);
    EXPECT_EQ(exit_code_for(ErrorCode::synth_version_mismatch), kFormat);
    EXPECT_EQ(exit_code_for(ErrorCode::checksum_mismatch), kFormat);
    EXPECT_EQ(exit_code_for(ErrorCode::prior_unavailable), kInternal);
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(ptm_run({}).code, kBadInput);
    EXPECT_EQ(ptm_run({"frobnicate"}).code, kBadInput);
    EXPECT_EQ(ptm_run({"stress", "entropy"}).code, kBadInput);
    EXPECT_EQ(ptm_run({"--help"}).code, kOk);
}

TEST(Cli, IngestMissingDictionaryNamesThePath)
{
    const auto r = ptm_run({"ingest", "--dict", "/nonexistent/words.dict", "--out", "/tmp/unused.ptmv"});
    EXPECT_EQ(r.code, kBadInput);
    EXPECT_NE(r.err.find("/nonexistent/words.dict"), std::string::npos);
}

TEST(Cli, IngestUnwritableOutput)
{
    const auto dir = scratch("ingest");
    write(dir / "tiny.dict", "cat  K AE1 T\n");
    write(dir / "blocker", "");
    const auto r = ptm_run({"ingest", "--dict", (dir / "tiny.dict").string(), "--out", (dir / "blocker/sub/x.ptmv").string()});
    EXPECT_EQ(r.code, kBadInput);

    const auto ok = ptm_run({"ingest", "--dict", (dir / "tiny.dict").string(), "--out", (dir / "tiny.ptmv").string()});
    EXPECT_EQ(ok.code, kOk);
    EXPECT_NE(ok.out.find("entries: 24"), std::string::npos); // 1 word + 23 symbols
}

TEST(Cli, EncodeFixtures)
{
    const auto dir = scratch("encode");
    const std::string dict = ptm::testing::dictionary_path();

    auto r = ptm_run({"encode", "--text", ptm::testing::data_path("fixtures/scifi_bridge.txt"), "--out",
                      (dir / "scifi.ptmt").string(), "--dict", dict, "--drop-rate", "0.7072"});
    ASSERT_EQ(r.code, kOk) << r.err;
    EXPECT_NE(r.out.find("anchors: 65\n"), std::string::npos) << r.out;
    EXPECT_EQ(read_trace((dir / "scifi.ptmt").string()).anchors.size(), 65U);

    r = ptm_run({"encode", "--text", ptm::testing::data_path("fixtures/valley_of_the_kings.txt"), "--out",
                 (dir / "valley.ptmt").string(), "--dict", dict, "--drop-rate", "1.0"});
    ASSERT_EQ(r.code, kOk) << r.err;
    EXPECT_NE(r.out.find("tokens: 335\n"), std::string::npos);
    EXPECT_NE(r.out.find("anchors: 0\n"), std::string::npos);
    EXPECT_NE(r.out.find("(0.0215 MB)"), std::string::npos) << r.out;

    write(dir / "empty.txt", "");
    r = ptm_run({"encode", "--text", (dir / "empty.txt").string(), "--out", (dir / "empty.ptmt").string(), "--dict", dict});
    ASSERT_EQ(r.code, kOk) << r.err;
    const auto empty = read_trace((dir / "empty.ptmt").string());
    EXPECT_EQ(empty.token_count(), 0U);

    r = ptm_run({"encode", "--text", (dir / "missing.txt").string(), "--out", (dir / "x.ptmt").string(), "--dict", dict});
    EXPECT_EQ(r.code, kBadInput);
    EXPECT_NE(r.err.find("missing.txt"), std::string::npos);

    r = ptm_run({"encode", "--text", (dir / "empty.txt").string(), "--out", (dir / "x.ptmt").string()});
    EXPECT_EQ(r.code, kBadInput); // no dictionary configured

    r = ptm_run({"encode", "--text", (dir / "empty.txt").string(), "--out", (dir / "x.ptmt").string(), "--dict", dict,
                 "--drop-rate", "1.5"});
    EXPECT_EQ(r.code, kBadInput);
}

TEST(Cli, ConfigFileAndOverrides)
{
    const auto dir = scratch("config");
    write(dir / "run.json", R"({"dictionary": ")" + ptm::testing::dictionary_path() +
                                R"(", "anchors": {"target_drop_rate": 0.5}})");
    write(dir / "t.txt", "the cat sat on the mat");
    auto r = ptm_run({"encode", "--config", (dir / "run.json").string(), "--text", (dir / "t.txt").string(), "--out",
                      (dir / "t.ptmt").string()});
    ASSERT_EQ(r.code, kOk) << r.err;
    EXPECT_NE(r.out.find("anchors: 3\n"), std::string::npos);
    r = ptm_run({"encode", "--config", (dir / "run.json").string(), "--text", (dir / "t.txt").string(), "--out",
                 (dir / "t.ptmt").string(), "--drop-rate", "0"});
    EXPECT_NE(r.out.find("anchors: 6\n"), std::string::npos);

    write(dir / "bad.json", R"({"colour": 1})");
    r = ptm_run({"encode", "--config", (dir / "bad.json").string(), "--text", (dir / "t.txt").string(), "--out",
                 (dir / "t.ptmt").string()});
    EXPECT_EQ(r.code, kBadInput);
}

TEST(Cli, DecodeRejectsCorruptTrace)
{
    const auto dir = scratch("decode");
    write(dir / "junk.ptmt", "XXXXjunkjunkjunk");
    auto r = ptm_run({"decode", "--trace", (dir / "junk.ptmt").string(), "--index", "/nonexistent.ptmv"});
    EXPECT_EQ(r.code, kFormat);
    r = ptm_run({"decode", "--trace", (dir / "missing.ptmt").string()});
    EXPECT_EQ(r.code, kBadInput);
}

TEST(Cli, StressOutputs)
{
    auto r = ptm_run({"stress", "collision", "--epsilon", "0.1", "--n", "1e6", "--dims", "16"});
    ASSERT_EQ(r.code, kOk);
    EXPECT_NE(r.out.find("2.35330630358893"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("1.17664622925"), std::string::npos);

    r = ptm_run({"stress", "cycle", "--bits", "24", "--rotors", "8"});
    ASSERT_EQ(r.code, kOk);
    EXPECT_NE(r.out.find(",6277101735386680763835789423207666416102355444464034512896\n"), std::string::npos);

    const auto dir = scratch("stress");
    const auto csv = (dir / "drift.csv").string();
    r = ptm_run({"stress", "drift", "--steps", "1000", "--out", csv});
    ASSERT_EQ(r.code, kOk);
    std::ifstream in(csv);
    std::string header, row, last;
    std::getline(in, header);
    EXPECT_EQ(header, "steps,error");
    std::size_t rows = 0;
    while (std::getline(in, row)) {
        ++rows;
        last = row;
    }
    EXPECT_EQ(rows, drift_checkpoints(1000).size());
    EXPECT_EQ(last.substr(0, 5), "1000,");

    r = ptm_run({"stress", "ergodicity", "--rational", "8", "--horizon", "16"});
    ASSERT_EQ(r.code, kOk);
    EXPECT_NE(r.out.find("rational/8,16,1,"), std::string::npos);

    EXPECT_EQ(ptm_run({"stress", "drift", "--steps", "0"}).code, kBadInput);
    EXPECT_EQ(ptm_run({"stress", "drift", "--precision", "half"}).code, kBadInput);
}

TEST(Cli, BenchUsageErrors)
{
    EXPECT_EQ(ptm_run({"bench", "--trace", "/nonexistent.ptmt"}).code, kBadInput);
    EXPECT_EQ(ptm_run({"bench", "--trace", "/nonexistent.ptmt", "--reps", "0"}).code, kBadInput);
}
