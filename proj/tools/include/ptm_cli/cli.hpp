#pragma once

// The `ptm` command line: configuration, subcommands and exit-code policy.
// Every command is callable in-process so tests do not need to spawn the
// binary.

#include <ptm/error.hpp>
#include <ptm/memory.hpp>
#include <ptm/resonance.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ptm::cli {

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kBadInput = 2,
    kFormat = 3,
};

int exit_code_for(ErrorCode code) noexcept;

enum class PriorKind { uniform, ngram, remote };

/// Environment variable that overrides the remote prior endpoint.
inline constexpr const char* kEndpointEnv = "PTM_PRIOR_ENDPOINT";

struct RunConfig {
    std::string dictionary;
    std::string corpus; // n-gram training text and surprisal statistics
    std::string index;
    AnchorPolicy anchors;
    DecoderConfig decoder;
    PriorKind prior = PriorKind::uniform;
    RemotePriorConfig remote;
    std::string precision = "single";
    std::string output_dir = ".";
    std::uint64_t seed = 0;
    std::uint64_t kv_bytes_per_token = 192'000;
    std::size_t window = 200;

    /// Unknown keys are rejected. Throws Error(invalid_argument).
    static RunConfig from_json(std::string_view json);
    /// Throws Error(io_error) if the file cannot be read.
    static RunConfig load(const std::string& path);

    /// Resolved settings as a JSON object with a fixed key order. The output
    /// directory is left out so reports do not depend on where they land.
    std::string to_json() const;

    /// Applies kEndpointEnv if set.
    void apply_environment();
};

std::string to_string(PriorKind kind);
PriorKind parse_prior(std::string_view name);

int cmd_ingest(const std::string& dict_path, const std::string& out_index, std::ostream& out);

int cmd_encode(const std::string& text_path, const std::string& out_trace, const RunConfig& config,
               std::ostream& out);

int cmd_decode(const std::string& trace_path, const std::string& out_text, const RunConfig& config,
               std::ostream& out);

struct AuditOutputs {
    bool write_trace = false;
    bool position_log = false;
};

/// Writes audit.json, audit.txt, windows.csv, reconstructed.txt and
/// audit.meta.json (wall-clock data) under config.output_dir.
int cmd_audit(const std::string& text_path, const RunConfig& config, const AuditOutputs& outputs,
              std::ostream& out);

struct StressParams {
    std::string kind; // drift | ergodicity | collision | cycle
    std::string precision = "single";
    std::uint64_t steps = 100'000;
    std::uint64_t horizon = 10'000;
    std::uint64_t skip = 1;
    double start = 0.3;
    std::uint32_t rational_q = 0; // > 0 selects the test-only rotation 2*pi/q
    double epsilon = 0.1;
    double n_tokens = 1e6;
    unsigned dims = 16;
    unsigned significand_bits = 24;
    unsigned rotors = 8;
};

/// CSV to `out_path`, or to `out` when the path is empty.
int cmd_stress(const StressParams& params, const std::string& out_path, std::ostream& out);

int cmd_bench(const std::string& trace_path, const RunConfig& config, const std::vector<std::uint64_t>& positions,
              std::size_t repetitions, const std::string& out_path, std::ostream& out);

/// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ptm::cli
