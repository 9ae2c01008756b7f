#pragma once

// Auditing and accounting: token diffs with an error taxonomy, windowed
// accuracy, memory arithmetic, analytic bounds and latency measurement.

#include "ptm/memory.hpp"
#include "ptm/resonance.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ptm {

inline constexpr std::uint64_t kDefaultKvBytesPerToken = 192'000;
inline constexpr std::size_t kDefaultWindow = 200;
inline constexpr double kHomophoneCosine = 0.999;
inline constexpr double kDriftCosine = 0.8;
inline constexpr int kAuditSchemaVersion = 1;

enum class ErrorClass : std::uint8_t { exact, homophone, phonetic_drift, unknown_marker, other };
std::string_view to_string(ErrorClass c) noexcept;

/// Miss classification from the cosine between the two fingerprints.
ErrorClass classify_miss(double cosine) noexcept;

struct MemoryAccounting {
    std::uint64_t baseline_bytes = 0;      // N * kv
    std::uint64_t sparse_anchor_bytes = 0; // anchors * kv
    std::uint64_t signal_bytes = 0;        // (N + 1) * 16 * 4
    double net_compression = 0.0;         // baseline / (sparse + signal)
    double signal_to_state_ratio = 0.0;   // baseline / signal; only meaningful with 0 anchors
};

MemoryAccounting account_memory(std::uint64_t token_count, std::uint64_t anchor_count,
                                std::uint64_t kv_bytes_per_token = kDefaultKvBytesPerToken);

struct ErrorBreakdown {
    std::size_t homophone = 0;
    std::size_t phonetic_drift = 0;
    std::size_t unknown_marker = 0;
    std::size_t other = 0;
};

struct Miss {
    std::uint64_t position = 0; // 0-based
    std::string original;
    std::string reconstructed;
    ErrorClass cls = ErrorClass::other;
    double cosine = 0.0;
    bool anchor = false;
};

struct AuditReport {
    std::size_t token_count = 0;
    std::size_t anchor_count = 0;
    double drop_rate = 0.0;
    std::size_t exact_matches = 0;
    double accuracy = 0.0;
    ErrorBreakdown errors;
    MemoryAccounting memory;
    std::uint64_t kv_bytes_per_token = kDefaultKvBytesPerToken;
    std::size_t window_size = kDefaultWindow;
    std::vector<double> windows;
    std::vector<Miss> misses;
    std::array<std::size_t, 5> outcomes{}; // indexed by Outcome
    std::size_t degraded_positions = 0;
};

struct AuditOptions {
    std::uint64_t kv_bytes_per_token = kDefaultKvBytesPerToken;
    std::size_t window_size = kDefaultWindow;
    std::string unknown_marker = "<aba?>";
};

/// Bridges compare case-insensitively, anchors exactly. Throws
/// Error(invalid_argument) on a length mismatch. `logs` may be empty.
AuditReport audit(std::span<const std::string> original, std::span<const std::string> reconstructed,
                  const MemoryTrace& trace, phonetics::FingerprintCache& fingerprints,
                  const AuditOptions& options = {}, std::span<const PositionLog> logs = {});

/// Non-overlapping window means; a shorter trailing window is kept.
/// Throws Error(invalid_argument) if window_size == 0.
std::vector<double> windowed_accuracy(const std::vector<bool>& matches, std::size_t window_size);

struct CollisionEstimate {
    double v_spot = 0.0;
    double p_collision = 0.0;
};

/// v = pi^(d/2) / (d/2)! * eps^d, p = 1 - exp(-n^2 v / 2). Requires even
/// dims > 0 and eps in (0, 0.5).
CollisionEstimate collision_probability(double epsilon, double n_tokens, unsigned dims);

/// sqrt(t) * eps. Throws for negative or NaN t.
double drift_bound(double t, double machine_epsilon);

using BigInt = boost::multiprecision::cpp_int;

/// 2^(significand_bits * n_rotors). Both must be positive.
BigInt cycle_length_bound(unsigned significand_bits, unsigned n_rotors);

struct LatencyStats {
    double median_us = 0.0;
    double p99_us = 0.0;
};

struct PositionLatency {
    std::uint64_t position = 0;
    LatencyStats stats;
};

struct LatencyReport {
    LatencyStats encode_per_token;
    std::vector<PositionLatency> decode;
    double depth_ratio = 0.0; // median at the deepest position / shallowest
    std::size_t repetitions = 0;
};

/// Uniform prior, bridge path forced at every sampled position. Positions
/// are 1-based steps. Throws Error(invalid_argument) if repetitions == 0,
/// positions is empty or a position is out of range.
LatencyReport latency_bench(const MemoryTrace& trace, const VocabIndex& vocab, std::span<const std::uint64_t> positions,
                            std::size_t repetitions, const DecoderConfig& config = {});

/// Nearest-rank percentile of an unsorted sample (p in [0, 100]).
double percentile(std::vector<double> sample, double p);

/// Machine-readable report. `config_json` (a JSON object) is embedded as the
/// resolved configuration; pass "{}" if there is none.
std::string audit_json(const AuditReport& report, std::string_view config_json);

/// Human-readable report rendered from audit_json() output.
std::string audit_text(std::string_view report_json);

std::string windows_csv(const AuditReport& report);
std::string drift_csv(const DriftReport& report);

} // namespace ptm
