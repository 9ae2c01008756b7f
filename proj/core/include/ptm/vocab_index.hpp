#pragma once

// The broadcast matrix: every known surface form with its fingerprint, kept in
// byte-lexicographic order so ties and serialization are deterministic.

#include "ptm/phonetics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ptm {

struct VocabEntry {
    std::string surface;
    phonetics::Fingerprint fingerprint;
    phonetics::TokenFlags flags;
};

struct Neighbor {
    std::uint32_t index = 0;
    std::string_view surface;
    double cosine = 0.0;
};

class VocabIndex {
public:
    /// Punctuation added to every index built by the tools.
    static const std::vector<std::string>& default_symbols();

    VocabIndex() = default;

    /// Fingerprints every table word plus `extra_symbols`. Work is split over
    /// `threads` workers (0 = hardware concurrency); the result does not
    /// depend on the thread count.
    static VocabIndex build(const phonetics::PronunciationTable& table,
                            std::span<const std::string> extra_symbols, unsigned threads = 0);

    /// Sorts the entries. Throws Error(invalid_argument) on duplicate surfaces.
    static VocabIndex from_entries(std::vector<VocabEntry> entries,
                                   std::uint32_t synth_version = phonetics::kSynthVersion);

    std::size_t size() const noexcept { return surfaces_.size(); }
    bool empty() const noexcept { return surfaces_.empty(); }
    std::uint32_t synth_version() const noexcept { return synth_version_; }

    std::string_view surface(std::size_t i) const { return surfaces_[i]; }
    phonetics::TokenFlags flags(std::size_t i) const { return flags_[i]; }
    phonetics::Fingerprint fingerprint(std::size_t i) const;
    std::size_t punctuation_count() const noexcept;

    /// Exact surface lookup (binary search).
    std::optional<std::size_t> find(std::string_view surface) const;

    /// Top-k by cosine, descending, ties to the lexicographically smaller
    /// surface. Exhaustive scan. k >= size() returns the whole index.
    /// Throws Error(invalid_argument) if k == 0 or the index is empty.
    std::vector<Neighbor> nearest(const phonetics::Fingerprint& probe, std::size_t k) const;

    /// Cosine between entry i and the probe (0 for a zero probe).
    double cosine(std::size_t i, const phonetics::Fingerprint& probe) const;

    /// "PTMV" binary layout; the u16 version field carries the synth version.
    std::string serialize() const;
    /// Throws bad_magic / truncated / synth_version_mismatch / corrupt.
    static VocabIndex deserialize(std::string_view bytes);

    void write(const std::string& path) const;
    static VocabIndex read(const std::string& path);

    friend bool operator==(const VocabIndex&, const VocabIndex&) = default;

private:
    void append(VocabEntry entry);
    void check_sorted_unique() const;

    std::uint32_t synth_version_ = phonetics::kSynthVersion;
    std::vector<std::string> surfaces_;
    std::vector<float> matrix_; // size() x 16, row-major
    std::vector<double> inv_norm_;
    std::vector<phonetics::TokenFlags> flags_;
};

} // namespace ptm
