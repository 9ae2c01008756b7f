#include "ptm/vocab_index.hpp"

#include "ptm/error.hpp"
#include "binio.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace ptm {
namespace {

constexpr std::string_view kMagic = "PTMV";

// Ranking order: higher cosine first, then lower index.
struct Better {
    bool operator()(const std::pair<double, std::uint32_t>& a, const std::pair<double, std::uint32_t>& b) const
    {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    }
};

double probe_norm(const phonetics::Fingerprint& probe)
{
    double sq = 0.0;
    for (float x : probe.coords) sq += static_cast<double>(x) * x;
    return std::sqrt(sq);
}

} // namespace

const std::vector<std::string>& VocabIndex::default_symbols()
{
    static const std::vector<std::string> symbols{
        ",", ".", "!", "?", ";", ":", "\"", "'", "(", ")", "[", "]", "-", "/", "&", "*",
        "–", "—", "…", "‘", "’", "“", "”",
    };
    return symbols;
}

VocabIndex VocabIndex::build(const phonetics::PronunciationTable& table,
                             std::span<const std::string> extra_symbols, unsigned threads)
{
    std::vector<std::string> surfaces;
    for (std::string_view w : table.sorted_words()) surfaces.emplace_back(w);
    for (const auto& s : extra_symbols) surfaces.push_back(s);
    std::sort(surfaces.begin(), surfaces.end());
    surfaces.erase(std::unique(surfaces.begin(), surfaces.end()), surfaces.end());

    std::vector<VocabEntry> entries(surfaces.size());
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, surfaces.size())));

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto tf = phonetics::fingerprint_token(surfaces[i], table);
            entries[i] = VocabEntry{std::move(surfaces[i]), tf.fingerprint, tf.flags};
        }
    };
    if (threads <= 1) {
        work(0, surfaces.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (surfaces.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(surfaces.size(), begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
    }
    return from_entries(std::move(entries));
}

VocabIndex VocabIndex::from_entries(std::vector<VocabEntry> entries, std::uint32_t synth_version)
{
    std::sort(entries.begin(), entries.end(),
              [](const VocabEntry& a, const VocabEntry& b) { return a.surface < b.surface; });
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].surface == entries[i - 1].surface) {
            throw Error(ErrorCode::invalid_argument, "vocab: duplicate surface '" + entries[i].surface + "'");
        }
    }
    VocabIndex index;
    index.synth_version_ = synth_version;
    index.surfaces_.reserve(entries.size());
    index.matrix_.reserve(entries.size() * kDim);
    index.inv_norm_.reserve(entries.size());
    index.flags_.reserve(entries.size());
    for (auto& e : entries) index.append(std::move(e));
    return index;
}

void VocabIndex::append(VocabEntry entry)
{
    double sq = 0.0;
    for (float x : entry.fingerprint.coords) {
        matrix_.push_back(x);
        sq += static_cast<double>(x) * x;
    }
    inv_norm_.push_back(sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0);
    flags_.push_back(entry.flags);
    surfaces_.push_back(std::move(entry.surface));
}

phonetics::Fingerprint VocabIndex::fingerprint(std::size_t i) const
{
    phonetics::Fingerprint fp;
    std::copy_n(matrix_.begin() + static_cast<std::ptrdiff_t>(i * kDim), kDim, fp.coords.begin());
    return fp;
}

std::size_t VocabIndex::punctuation_count() const noexcept
{
    return static_cast<std::size_t>(
        std::count_if(flags_.begin(), flags_.end(), [](phonetics::TokenFlags f) { return f.punctuation; }));
}

std::optional<std::size_t> VocabIndex::find(std::string_view surface) const
{
    const auto it = std::lower_bound(surfaces_.begin(), surfaces_.end(), surface,
                                     [](const std::string& a, std::string_view b) { return a < b; });
    if (it == surfaces_.end() || *it != surface) return std::nullopt;
    return static_cast<std::size_t>(it - surfaces_.begin());
}

double VocabIndex::cosine(std::size_t i, const phonetics::Fingerprint& probe) const
{
    const double pn = probe_norm(probe);
    if (pn == 0.0) return 0.0;
    const float* row = matrix_.data() + i * kDim;
    double dot = 0.0;
    for (std::size_t d = 0; d < kDim; ++d) dot += static_cast<double>(row[d]) * probe.coords[d];
    return dot * inv_norm_[i] / pn;
}

std::vector<Neighbor> VocabIndex::nearest(const phonetics::Fingerprint& probe, std::size_t k) const
{
    if (k == 0) throw Error(ErrorCode::invalid_argument, "nearest: k must be >= 1");
    if (empty()) throw Error(ErrorCode::invalid_argument, "nearest: empty vocabulary index");
    k = std::min(k, size());

    const double pn = probe_norm(probe);
    const double inv_pn = pn > 0.0 ? 1.0 / pn : 0.0;
    std::array<double, kDim> p{};
    for (std::size_t d = 0; d < kDim; ++d) p[d] = probe.coords[d];

    // Max-heap on "worse", so the root is the weakest of the current top-k.
    std::vector<std::pair<double, std::uint32_t>> heap;
    heap.reserve(k + 1);
    const Better better;
    const float* row = matrix_.data();
    for (std::size_t i = 0; i < size(); ++i, row += kDim) {
        double dot = 0.0;
        for (std::size_t d = 0; d < kDim; ++d) dot += static_cast<double>(row[d]) * p[d];
        const std::pair<double, std::uint32_t> cand{dot * inv_norm_[i] * inv_pn, static_cast<std::uint32_t>(i)};
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end(), better);
        } else if (better(cand, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), better);
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end(), better);
        }
    }
    std::sort(heap.begin(), heap.end(), better);

    std::vector<Neighbor> out;
    out.reserve(heap.size());
    for (const auto& [cos, idx] : heap) out.push_back({idx, surfaces_[idx], cos});
    return out;
}

std::string VocabIndex::serialize() const
{
    detail::ByteWriter w;
    w.bytes(kMagic);
    w.u16(static_cast<std::uint16_t>(synth_version_));
    w.u64(size());
    for (std::size_t i = 0; i < size(); ++i) {
        w.u16(static_cast<std::uint16_t>(surfaces_[i].size()));
        w.bytes(surfaces_[i]);
        w.u8(flags_[i].to_byte());
        for (std::size_t d = 0; d < kDim; ++d) w.f32(matrix_[i * kDim + d]);
    }
    return w.take();
}

VocabIndex VocabIndex::deserialize(std::string_view bytes)
{
    detail::ByteReader r(bytes, "vocab index");
    if (r.bytes(kMagic.size()) != kMagic) throw Error(ErrorCode::bad_magic, "vocab index: bad magic");
    const std::uint16_t version = r.u16();
    if (version != phonetics::kSynthVersion) {
        throw Error(ErrorCode::synth_version_mismatch,
                    "vocab index: synth version " + std::to_string(version) + ", this build uses " +
                        std::to_string(phonetics::kSynthVersion));
    }
    const std::uint64_t count = r.u64();
    // Each entry needs at least 2 + 1 + 64 bytes.
    if (count > r.remaining() / 67) throw Error(ErrorCode::truncated, "vocab index: entry count exceeds file size");

    VocabIndex index;
    index.synth_version_ = version;
    index.surfaces_.reserve(count);
    index.matrix_.reserve(count * kDim);
    for (std::uint64_t i = 0; i < count; ++i) {
        VocabEntry e;
        const std::uint16_t len = r.u16();
        e.surface = std::string(r.bytes(len));
        const std::uint8_t flags = r.u8();
        if (flags > 3) throw Error(ErrorCode::corrupt, "vocab index: unknown flag bits");
        e.flags = phonetics::TokenFlags::from_byte(flags);
        for (float& x : e.fingerprint.coords) x = r.f32();
        index.append(std::move(e));
    }
    if (r.remaining() != 0) throw Error(ErrorCode::corrupt, "vocab index: trailing bytes");
    index.check_sorted_unique();
    return index;
}

void VocabIndex::check_sorted_unique() const
{
    for (std::size_t i = 1; i < surfaces_.size(); ++i) {
        if (!(surfaces_[i - 1] < surfaces_[i])) {
            throw Error(ErrorCode::corrupt, "vocab index: entries not strictly sorted at " + std::to_string(i));
        }
    }
}

void VocabIndex::write(const std::string& path) const
{
    detail::write_file(path, serialize());
}

VocabIndex VocabIndex::read(const std::string& path)
{
    return deserialize(detail::read_file(path));
}

} // namespace ptm
