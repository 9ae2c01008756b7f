#include "ptm_cli/cli.hpp"

#include <ptm/metrics.hpp>
#include <ptm/vocab_index.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

namespace ptm::cli {
namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, std::string_view data)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path.string() + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorCode::io_error, "write failed for '" + path.string() + "'");
}

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::io_error, "cannot create output directory '" + dir + "'");
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string utc_timestamp()
{
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void check_keys(const Json& obj, std::string_view where, std::initializer_list<std::string_view> allowed)
{
    if (!obj.is_object()) throw Error(ErrorCode::invalid_argument, "config: '" + std::string(where) + "' must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw Error(ErrorCode::invalid_argument, "config: unknown key '" + key + "' in " + std::string(where));
        }
    }
}

template <class T>
void read_field(const Json& obj, const char* key, T& dst)
{
    if (!obj.contains(key)) return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::invalid_argument, std::string("config: bad value for '") + key + "'");
    }
}

std::string anchor_mode_name(AnchorPolicy::Mode m)
{
    return m == AnchorPolicy::Mode::target_rate ? "target_rate" : "threshold";
}

AnchorPolicy::Mode parse_anchor_mode(std::string_view s)
{
    if (s == "target_rate") return AnchorPolicy::Mode::target_rate;
    if (s == "threshold") return AnchorPolicy::Mode::threshold;
    throw Error(ErrorCode::invalid_argument, "unknown anchor mode '" + std::string(s) + "'");
}

void require_path(const std::string& path, const char* what, const char* flag)
{
    if (path.empty()) {
        throw Error(ErrorCode::invalid_argument, std::string("no ") + what + " configured (" + flag + ")");
    }
}

void require_single(const RunConfig& c)
{
    if (c.precision != "single") {
        throw Error(ErrorCode::invalid_argument, "the pipeline runs in single precision only; double precision is "
                                                 "available as an oracle through `ptm stress --precision double`");
    }
}

phonetics::PronunciationTable load_table(const RunConfig& c)
{
    require_path(c.dictionary, "dictionary", "--dict");
    return phonetics::load_dictionary(c.dictionary).table;
}

VocabIndex load_index(const RunConfig& c)
{
    require_path(c.index, "vocabulary index", "--index");
    return VocabIndex::read(c.index);
}

std::unique_ptr<SemanticPrior> make_prior(const RunConfig& c)
{
    switch (c.prior) {
    case PriorKind::uniform:
        return std::make_unique<UniformPrior>();
    case PriorKind::ngram:
        require_path(c.corpus, "training corpus for the n-gram prior", "--corpus");
        return std::make_unique<NgramPrior>(NgramPrior::train_text(read_text(c.corpus)));
    case PriorKind::remote:
        return std::make_unique<RemotePrior>(c.remote);
    }
    throw Error(ErrorCode::invalid_argument, "unknown prior");
}

struct Encoded {
    std::vector<std::string> tokens;
    EncodeResult result;
};

Encoded encode_text(const std::string& text, const RunConfig& c, const phonetics::PronunciationTable& table,
                    phonetics::FingerprintCache& cache)
{
    Encoded e;
    e.tokens = tokenize(text);
    const CorpusStats stats =
        c.corpus.empty() ? CorpusStats::from_tokens(e.tokens) : CorpusStats::from_text(read_text(c.corpus));
    const auto anchors = select_anchors(e.tokens, c.anchors, stats, &table);
    e.result = encode(e.tokens, anchors, RotationOperator::standard(), cache);
    return e;
}

std::string join(const std::vector<std::string>& tokens)
{
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += tokens[i];
    }
    if (!tokens.empty()) out += '\n';
    return out;
}

std::string positions_csv(const std::vector<PositionLog>& logs)
{
    std::string out = "position,candidate,cosine,distance,p_signal,p_prior,p_total,chosen,outcome,prior_degraded\n";
    char buf[160];
    for (const auto& log : logs) {
        for (const auto& c : log.candidates) {
            std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.17g,%.17g,%.17g", c.cosine, c.distance, c.p_signal,
                          c.p_prior, c.p_total);
            std::string surface = c.surface;
            if (surface.find_first_of(",\"") != std::string::npos) {
                std::string quoted = "\"";
                for (char ch : surface) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                surface = quoted + "\"";
            }
            out += std::to_string(log.position) + "," + surface + "," + buf + "," +
                   (c.surface == log.chosen ? "1" : "0") + "," + std::string(to_string(log.outcome)) + "," +
                   (log.prior_degraded ? "1" : "0") + "\n";
        }
    }
    return out;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn)
{
    try {
        return fn();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
}

} // namespace

int exit_code_for(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::io_error:
    case ErrorCode::unknown_phoneme:
    case ErrorCode::degenerate_signal:
        return kBadInput;
    case ErrorCode::bad_magic:
    case ErrorCode::version_mismatch:
    case ErrorCode::truncated:
    case ErrorCode::checksum_mismatch:
    case ErrorCode::corrupt:
    case ErrorCode::synth_version_mismatch:
        return kFormat;
    case ErrorCode::prior_unavailable:
    case ErrorCode::malformed_response:
        return kInternal;
    }
    return kInternal;
}

std::string to_string(PriorKind kind)
{
    switch (kind) {
    case PriorKind::uniform: return "uniform";
    case PriorKind::ngram: return "ngram";
    case PriorKind::remote: return "remote";
    }
    return "?";
}

PriorKind parse_prior(std::string_view name)
{
    if (name == "uniform") return PriorKind::uniform;
    if (name == "ngram") return PriorKind::ngram;
    if (name == "remote") return PriorKind::remote;
    throw Error(ErrorCode::invalid_argument, "unknown prior '" + std::string(name) + "' (uniform, ngram, remote)");
}

RunConfig RunConfig::from_json(std::string_view json)
{
    const Json doc = Json::parse(json, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) throw Error(ErrorCode::invalid_argument, "config: not valid JSON");
    // The two version keys are informational: a saved report config can be
    // fed back as a run config.
    check_keys(doc, "config",
               {"dictionary", "corpus", "index", "anchors", "decoder", "prior", "precision", "output_dir", "seed",
                "kv_bytes_per_token", "window", "synth_version", "trace_version"});
    RunConfig c;
    read_field(doc, "dictionary", c.dictionary);
    read_field(doc, "corpus", c.corpus);
    read_field(doc, "index", c.index);
    read_field(doc, "precision", c.precision);
    read_field(doc, "output_dir", c.output_dir);
    read_field(doc, "seed", c.seed);
    read_field(doc, "kv_bytes_per_token", c.kv_bytes_per_token);
    read_field(doc, "window", c.window);

    if (doc.contains("anchors")) {
        const Json& a = doc["anchors"];
        check_keys(a, "anchors",
                   {"mode", "target_drop_rate", "surprisal_threshold", "always_anchor_oov", "always_anchor_numerals"});
        std::string mode = anchor_mode_name(c.anchors.mode);
        read_field(a, "mode", mode);
        c.anchors.mode = parse_anchor_mode(mode);
        read_field(a, "target_drop_rate", c.anchors.target_drop_rate);
        if (a.contains("surprisal_threshold") && !a["surprisal_threshold"].is_null()) {
            read_field(a, "surprisal_threshold", c.anchors.surprisal_threshold);
        }
        read_field(a, "always_anchor_oov", c.anchors.always_anchor_oov);
        read_field(a, "always_anchor_numerals", c.anchors.always_anchor_numerals);
    }
    if (doc.contains("decoder")) {
        const Json& d = doc["decoder"];
        check_keys(d, "decoder", {"alpha", "gamma", "top_k", "unknown_threshold", "unknown_marker"});
        read_field(d, "alpha", c.decoder.alpha);
        read_field(d, "gamma", c.decoder.gamma);
        read_field(d, "top_k", c.decoder.top_k);
        read_field(d, "unknown_threshold", c.decoder.unknown_threshold);
        read_field(d, "unknown_marker", c.decoder.unknown_marker);
    }
    if (doc.contains("prior")) {
        const Json& p = doc["prior"];
        check_keys(p, "prior", {"kind", "endpoint", "timeout_ms", "retries", "context_window"});
        std::string kind = to_string(c.prior);
        read_field(p, "kind", kind);
        c.prior = parse_prior(kind);
        read_field(p, "endpoint", c.remote.endpoint);
        std::int64_t timeout_ms = c.remote.timeout.count();
        read_field(p, "timeout_ms", timeout_ms);
        c.remote.timeout = std::chrono::milliseconds(timeout_ms);
        read_field(p, "retries", c.remote.retries);
        read_field(p, "context_window", c.remote.context_window);
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path)
{
    return from_json(read_text(path));
}

std::string RunConfig::to_json() const
{
    Json doc;
    doc["dictionary"] = dictionary;
    doc["corpus"] = corpus;
    doc["index"] = index;
    Json a;
    a["mode"] = anchor_mode_name(anchors.mode);
    a["target_drop_rate"] = anchors.target_drop_rate;
    a["surprisal_threshold"] =
        std::isfinite(anchors.surprisal_threshold) ? Json(anchors.surprisal_threshold) : Json(nullptr);
    a["always_anchor_oov"] = anchors.always_anchor_oov;
    a["always_anchor_numerals"] = anchors.always_anchor_numerals;
    doc["anchors"] = a;
    doc["decoder"] = {{"alpha", decoder.alpha},
                      {"gamma", decoder.gamma},
                      {"top_k", decoder.top_k},
                      {"unknown_threshold", decoder.unknown_threshold},
                      {"unknown_marker", decoder.unknown_marker}};
    doc["prior"] = {{"kind", to_string(prior)},
                    {"endpoint", remote.endpoint},
                    {"timeout_ms", remote.timeout.count()},
                    {"retries", remote.retries},
                    {"context_window", remote.context_window}};
    doc["precision"] = precision;
    doc["seed"] = seed;
    doc["kv_bytes_per_token"] = kv_bytes_per_token;
    doc["window"] = window;
    doc["synth_version"] = phonetics::kSynthVersion;
    doc["trace_version"] = kTraceVersion;
    return doc.dump();
}

void RunConfig::apply_environment()
{
    if (const char* env = std::getenv(kEndpointEnv); env != nullptr && *env != '\0') remote.endpoint = env;
}

int cmd_ingest(const std::string& dict_path, const std::string& out_index, std::ostream& out)
{
    const auto t0 = Clock::now();
    const auto load = phonetics::load_dictionary(dict_path);
    const auto index = VocabIndex::build(load.table, VocabIndex::default_symbols());
    index.write(out_index);
    out << "entries: " << index.size() << "\n"
        << "words: " << load.table.size() << "\n"
        << "symbols: " << index.punctuation_count() << "\n"
        << "alternates skipped: " << load.alternates << "\n"
        << "malformed lines: " << load.warnings << "\n"
        << "build time: " << seconds_since(t0) << " s\n"
        << "index: " << out_index << "\n";
    return kOk;
}

int cmd_encode(const std::string& text_path, const std::string& out_trace, const RunConfig& config, std::ostream& out)
{
    require_single(config);
    const std::string text = read_text(text_path);
    const auto table = load_table(config);
    phonetics::FingerprintCache cache(table);
    const auto e = encode_text(text, config, table, cache);
    write_trace(e.result.trace, out_trace);

    const auto& trace = e.result.trace;
    const auto oov = std::count_if(e.result.records.begin(), e.result.records.end(),
                                   [](const TokenRecord& r) { return r.flags.oov_synthetic; });
    char mb[32];
    std::snprintf(mb, sizeof mb, "%.4f", static_cast<double>(trace.signal_bytes()) / 1e6);
    out << "tokens: " << trace.token_count() << "\n"
        << "anchors: " << trace.anchors.size() << "\n"
        << "oov tokens: " << oov << "\n"
        << "signal: " << trace.signal_bytes() << " bytes (" << mb << " MB)\n"
        << "trace: " << out_trace << "\n";
    return kOk;
}

int cmd_decode(const std::string& trace_path, const std::string& out_text, const RunConfig& config, std::ostream& out)
{
    require_single(config);
    const auto trace = read_trace(trace_path);
    const auto index = load_index(config);
    const auto prior = make_prior(config);
    const Decoder decoder(trace, index, *prior, config.decoder);
    const auto rec = decoder.reconstruct();
    const std::string text = join(rec.tokens);
    if (out_text.empty()) {
        out << text;
    } else {
        write_text(out_text, text);
        out << "tokens: " << rec.tokens.size() << "\n"
            << "prior degraded positions: " << rec.degraded_positions << "\n"
            << "output: " << out_text << "\n";
    }
    return kOk;
}

int cmd_audit(const std::string& text_path, const RunConfig& config, const AuditOutputs& outputs, std::ostream& out)
{
    require_single(config);
    const std::string text = read_text(text_path);
    const auto table = load_table(config);
    const auto index = load_index(config);
    const auto prior = make_prior(config);
    ensure_dir(config.output_dir);
    const fs::path dir(config.output_dir);

    phonetics::FingerprintCache cache(table);
    const auto t_encode = Clock::now();
    const auto e = encode_text(text, config, table, cache);
    const double encode_s = seconds_since(t_encode);

    const auto t_decode = Clock::now();
    const Decoder decoder(e.result.trace, index, *prior, config.decoder);
    const auto rec = decoder.reconstruct();
    const double decode_s = seconds_since(t_decode);

    AuditOptions opts;
    opts.kv_bytes_per_token = config.kv_bytes_per_token;
    opts.window_size = config.window;
    opts.unknown_marker = config.decoder.unknown_marker;
    const auto report = audit(e.tokens, rec.tokens, e.result.trace, cache, opts, rec.logs);

    const std::string json = audit_json(report, config.to_json());
    write_text(dir / "audit.json", json);
    write_text(dir / "audit.txt", audit_text(json));
    write_text(dir / "windows.csv", windows_csv(report));
    write_text(dir / "reconstructed.txt", join(rec.tokens));
    if (outputs.write_trace) write_trace(e.result.trace, (dir / "trace.ptmt").string());
    if (outputs.position_log) write_text(dir / "positions.csv", positions_csv(rec.logs));

    Json meta;
    meta["started_at"] = utc_timestamp();
    meta["encode_seconds"] = encode_s;
    meta["decode_seconds"] = decode_s;
    meta["tokens_per_second"] = decode_s > 0 ? static_cast<double>(report.token_count) / decode_s : 0.0;
    write_text(dir / "audit.meta.json", meta.dump(2) + "\n");

    char acc[32];
    std::snprintf(acc, sizeof acc, "%.2f%%", 100.0 * report.accuracy);
    out << "tokens: " << report.token_count << "\n"
        << "anchors: " << report.anchor_count << "\n"
        << "accuracy: " << acc << "\n"
        << "misses: homophone " << report.errors.homophone << ", phonetic_drift " << report.errors.phonetic_drift
        << ", unknown " << report.errors.unknown_marker << ", other " << report.errors.other << "\n"
        << "prior degraded positions: " << report.degraded_positions << "\n"
        << "report: " << (dir / "audit.json").string() << "\n";
    return kOk;
}

int cmd_stress(const StressParams& p, const std::string& out_path, std::ostream& out)
{
    std::string csv;
    std::string summary;
    if (p.kind == "drift") {
        if (p.steps == 0) throw Error(ErrorCode::invalid_argument, "stress drift: --steps must be >= 1");
        const auto rotation = RotationOperator::standard();
        DriftReport report;
        if (p.precision == "single") {
            report = drift_stress<float>(rotation, p.steps);
        } else if (p.precision == "double") {
            report = drift_stress<double>(rotation, p.steps);
        } else {
            throw Error(ErrorCode::invalid_argument, "stress drift: precision must be single or double");
        }
        csv = drift_csv(report);
        std::ostringstream s;
        s.precision(17);
        s << "max_error: " << report.max_error << "\n";
        summary = s.str();
    } else if (p.kind == "ergodicity") {
        const auto rotation =
            p.rational_q > 0 ? RotationOperator::rational(p.rational_q, TestOnly{}) : RotationOperator::standard();
        Coords<float> start;
        start.fill(static_cast<float>(p.start));
        const double d = orbit_min_return(rotation, TorusState(start), p.horizon, p.skip);
        std::ostringstream s;
        s.precision(17);
        s << "rotation,horizon,skip,start,min_return\n"
          << (p.rational_q > 0 ? "rational/" + std::to_string(p.rational_q) : std::string("irrational")) << ","
          << p.horizon << "," << p.skip << "," << p.start << "," << d << "\n";
        csv = s.str();
    } else if (p.kind == "collision") {
        const auto c = collision_probability(p.epsilon, p.n_tokens, p.dims);
        std::ostringstream s;
        s.precision(17);
        s << "epsilon,n,dims,v_spot,p_collision\n"
          << p.epsilon << "," << p.n_tokens << "," << p.dims << "," << c.v_spot << "," << c.p_collision << "\n";
        csv = s.str();
    } else if (p.kind == "cycle") {
        const auto bound = cycle_length_bound(p.significand_bits, p.rotors);
        csv = "significand_bits,rotors,cycle_length_bound\n" + std::to_string(p.significand_bits) + "," +
              std::to_string(p.rotors) + "," + bound.str() + "\n";
    } else {
        throw Error(ErrorCode::invalid_argument, "unknown stress kind '" + p.kind + "'");
    }
    if (out_path.empty()) {
        out << csv;
    } else {
        write_text(out_path, csv);
        out << summary << "csv: " << out_path << "\n";
    }
    return kOk;
}

int cmd_bench(const std::string& trace_path, const RunConfig& config, const std::vector<std::uint64_t>& positions,
              std::size_t repetitions, const std::string& out_path, std::ostream& out)
{
    if (repetitions == 0) throw Error(ErrorCode::invalid_argument, "bench: --reps must be >= 1");
    const auto trace = read_trace(trace_path);
    const auto index = load_index(config);
    std::vector<std::uint64_t> pos = positions;
    if (pos.empty()) {
        const std::uint64_t n = trace.token_count();
        if (n == 0) throw Error(ErrorCode::invalid_argument, "bench: trace is empty");
        pos = {std::min<std::uint64_t>(100, n), std::max<std::uint64_t>(1, n / 2), n};
    }
    const auto report = latency_bench(trace, index, pos, repetitions, config.decoder);

    Json doc;
    doc["token_count"] = trace.token_count();
    doc["repetitions"] = report.repetitions;
    doc["encode_per_token_us"] = {{"median", report.encode_per_token.median_us},
                                  {"p99", report.encode_per_token.p99_us}};
    Json decode = Json::array();
    for (const auto& d : report.decode) {
        decode.push_back({{"position", d.position}, {"median_us", d.stats.median_us}, {"p99_us", d.stats.p99_us}});
    }
    doc["decode"] = decode;
    doc["depth_ratio"] = report.depth_ratio;
    const std::string json = doc.dump(2) + "\n";
    if (out_path.empty()) {
        out << json;
    } else {
        write_text(out_path, json);
        out << "depth_ratio: " << report.depth_ratio << "\n" << "report: " << out_path << "\n";
    }
    return kOk;
}

namespace {

// Flag overrides shared by the pipeline subcommands.
struct Overrides {
    std::string config_path;
    std::optional<std::string> dict, corpus, index, out_dir, prior, endpoint, anchor_mode, marker;
    std::optional<double> drop_rate, threshold, alpha, gamma, unknown_threshold;
    std::optional<std::size_t> top_k, window;
    std::optional<std::uint64_t> kv_bytes, seed;
    std::optional<std::int64_t> timeout_ms;

    void attach(CLI::App* app, bool pipeline)
    {
        app->add_option("--config", config_path, "JSON run configuration");
        app->add_option("--dict", dict, "pronouncing dictionary");
        app->add_option("--index", index, "vocabulary index written by `ptm ingest`");
        if (!pipeline) return;
        app->add_option("--corpus", corpus, "corpus for surprisal statistics and the n-gram prior");
        app->add_option("--out-dir", out_dir, "output directory");
        app->add_option("--prior", prior, "uniform | ngram | remote");
        app->add_option("--endpoint", endpoint, "remote prior URL (http://host:port/path)");
        app->add_option("--timeout-ms", timeout_ms, "remote prior timeout");
        app->add_option("--anchor-mode", anchor_mode, "target_rate | threshold");
        app->add_option("--drop-rate", drop_rate, "fraction of tokens not anchored");
        app->add_option("--threshold", threshold, "surprisal threshold (threshold mode)");
        app->add_option("--alpha", alpha, "prior weight in the consensus");
        app->add_option("--gamma", gamma, "transition-error sharpness");
        app->add_option("--top-k", top_k, "candidates shortlisted per position");
        app->add_option("--unknown-threshold", unknown_threshold, "best-cosine cut for the unknown marker");
        app->add_option("--unknown-marker", marker, "text emitted for unrecoverable positions");
        app->add_option("--kv-bytes", kv_bytes, "KV-cache bytes per token for accounting");
        app->add_option("--window", window, "window size for windowed accuracy");
        app->add_option("--seed", seed, "seed recorded with the run");
    }

    RunConfig resolve() const
    {
        RunConfig c = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
        c.apply_environment();
        if (dict) c.dictionary = *dict;
        if (corpus) c.corpus = *corpus;
        if (index) c.index = *index;
        if (out_dir) c.output_dir = *out_dir;
        if (prior) c.prior = parse_prior(*prior);
        if (endpoint) c.remote.endpoint = *endpoint;
        if (timeout_ms) c.remote.timeout = std::chrono::milliseconds(*timeout_ms);
        if (anchor_mode) c.anchors.mode = parse_anchor_mode(*anchor_mode);
        if (drop_rate) c.anchors.target_drop_rate = *drop_rate;
        if (threshold) c.anchors.surprisal_threshold = *threshold;
        if (alpha) c.decoder.alpha = *alpha;
        if (gamma) c.decoder.gamma = *gamma;
        if (top_k) c.decoder.top_k = *top_k;
        if (unknown_threshold) c.decoder.unknown_threshold = *unknown_threshold;
        if (marker) c.decoder.unknown_marker = *marker;
        if (kv_bytes) c.kv_bytes_per_token = *kv_bytes;
        if (window) c.window = *window;
        if (seed) c.seed = *seed;
        c.anchors.validate();
        c.decoder.validate();
        if (c.window == 0) throw Error(ErrorCode::invalid_argument, "window must be >= 1");
        return c;
    }
};

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"ptm: toroidal phonetic memory compression"};
    app.require_subcommand(1);
    std::function<int()> action;

    std::string dict_path, index_out;
    auto* ingest = app.add_subcommand("ingest", "build the vocabulary index from a pronouncing dictionary");
    ingest->add_option("--dict", dict_path, "CMUdict-format file")->required();
    ingest->add_option("--out", index_out, "index file to write")->required();
    ingest->callback([&] { action = [&] { return cmd_ingest(dict_path, index_out, out); }; });

    Overrides encode_ov;
    std::string encode_text_path, encode_out;
    auto* enc = app.add_subcommand("encode", "encode a text file into a trace");
    enc->add_option("--text", encode_text_path, "UTF-8 input text")->required();
    enc->add_option("--out", encode_out, "trace file to write")->required();
    encode_ov.attach(enc, true);
    enc->callback([&] {
        action = [&] { return cmd_encode(encode_text_path, encode_out, encode_ov.resolve(), out); };
    });

    Overrides decode_ov;
    std::string decode_trace, decode_out;
    auto* dec = app.add_subcommand("decode", "reconstruct the token stream of a trace");
    dec->add_option("--trace", decode_trace, "trace file")->required();
    dec->add_option("--out", decode_out, "text file to write (stdout if omitted)");
    decode_ov.attach(dec, true);
    dec->callback([&] {
        action = [&] { return cmd_decode(decode_trace, decode_out, decode_ov.resolve(), out); };
    });

    Overrides audit_ov;
    std::string audit_text_path;
    AuditOutputs audit_outputs;
    auto* aud = app.add_subcommand("audit", "encode, reconstruct and score a text in one run");
    aud->add_option("--text", audit_text_path, "UTF-8 input text")->required();
    aud->add_flag("--write-trace", audit_outputs.write_trace, "also write trace.ptmt");
    aud->add_flag("--positions", audit_outputs.position_log, "also write the per-candidate decode log");
    audit_ov.attach(aud, true);
    aud->callback([&] {
        action = [&] { return cmd_audit(audit_text_path, audit_ov.resolve(), audit_outputs, out); };
    });

    StressParams stress_params;
    std::string stress_out;
    auto* stress = app.add_subcommand("stress", "numerical stress tests and analytic bounds");
    stress->add_option("kind", stress_params.kind, "drift | ergodicity | collision | cycle")
        ->required()
        ->check(CLI::IsMember({"drift", "ergodicity", "collision", "cycle"}));
    stress->add_option("--precision", stress_params.precision, "single | double (drift)");
    stress->add_option("--steps", stress_params.steps, "forward steps (drift)");
    stress->add_option("--horizon", stress_params.horizon, "orbit length (ergodicity)");
    stress->add_option("--skip", stress_params.skip, "first orbit step compared (ergodicity)");
    stress->add_option("--start", stress_params.start, "start coordinate, all dims (ergodicity)");
    stress->add_option("--rational", stress_params.rational_q, "use the test-only rotation 2*pi/q (ergodicity)");
    stress->add_option("--epsilon", stress_params.epsilon, "neighborhood radius (collision)");
    stress->add_option("--n", stress_params.n_tokens, "number of tokens (collision)");
    stress->add_option("--dims", stress_params.dims, "dimensions (collision)");
    stress->add_option("--bits", stress_params.significand_bits, "significand bits (cycle)");
    stress->add_option("--rotors", stress_params.rotors, "rotor count (cycle)");
    stress->add_option("--out", stress_out, "CSV file (stdout if omitted)");
    stress->callback([&] { action = [&] { return cmd_stress(stress_params, stress_out, out); }; });

    Overrides bench_ov;
    std::string bench_trace, bench_out;
    std::vector<std::uint64_t> bench_positions;
    std::size_t bench_reps = 200;
    auto* bench = app.add_subcommand("bench", "decode latency at several depths of a trace");
    bench->add_option("--trace", bench_trace, "trace file")->required();
    bench->add_option("--positions", bench_positions, "1-based steps to time")->delimiter(',');
    bench->add_option("--reps", bench_reps, "timed repetitions per position");
    bench->add_option("--out", bench_out, "JSON file (stdout if omitted)");
    bench_ov.attach(bench, false);
    bench->callback([&] {
        action = [&] { return cmd_bench(bench_trace, bench_ov.resolve(), bench_positions, bench_reps, bench_out, out); };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadInput;
    }
    return guarded(err, action);
}

} // namespace ptm::cli
