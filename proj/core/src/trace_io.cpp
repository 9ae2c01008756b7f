#include "ptm/error.hpp"
#include "ptm/memory.hpp"
#include "binio.hpp"

#include <zlib.h>

namespace ptm {
namespace {

constexpr std::string_view kMagic = "PTMT";

std::uint32_t crc32_of(std::string_view bytes)
{
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in bounded slices.
    constexpr std::size_t kSlice = 1U << 30;
    for (std::size_t off = 0; off < bytes.size(); off += kSlice) {
        const std::size_t len = std::min(kSlice, bytes.size() - off);
        crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(len));
    }
    return static_cast<std::uint32_t>(crc);
}

[[noreturn]] void corrupt(const std::string& what)
{
    throw Error(ErrorCode::corrupt, "trace: " + what);
}

} // namespace

std::string serialize_trace(const MemoryTrace& trace)
{
    detail::ByteWriter w;
    w.bytes(kMagic);
    w.u16(kTraceVersion);
    w.u16(static_cast<std::uint16_t>(kDim));
    w.u8(static_cast<std::uint8_t>(trace.config.precision));
    w.u8(static_cast<std::uint8_t>(kRotorCount));
    for (std::uint32_t p : trace.config.primes) w.u32(p);
    w.u32(trace.config.synth_version);
    w.u64(trace.token_count());
    w.u64(trace.anchors.size());
    for (const auto& a : trace.anchors) {
        if (a.surface.size() > 0xFFFF) {
            throw Error(ErrorCode::invalid_argument, "trace: anchor surface longer than 65535 bytes");
        }
        w.u64(a.position);
        w.u16(static_cast<std::uint16_t>(a.surface.size()));
        w.bytes(a.surface);
    }
    for (const auto& s : trace.states) {
        for (float c : s.coords()) w.f32(c);
    }
    std::string out = w.take();
    detail::ByteWriter tail;
    tail.u32(crc32_of(out));
    out += tail.buffer();
    return out;
}

MemoryTrace deserialize_trace(std::string_view bytes)
{
    detail::ByteReader r(bytes, "trace");
    if (bytes.size() < kMagic.size()) throw Error(ErrorCode::truncated, "trace: file too short for a header");
    if (r.bytes(kMagic.size()) != kMagic) {
        throw Error(ErrorCode::bad_magic, "trace: bad magic");
    }
    const std::uint16_t version = r.u16();
    if (version != kTraceVersion) {
        throw Error(ErrorCode::version_mismatch, "trace: format version " + std::to_string(version) +
                                                     ", expected " + std::to_string(kTraceVersion));
    }
    const std::uint16_t dim = r.u16();
    const std::uint8_t precision = r.u8();
    const std::uint8_t prime_count = r.u8();
    if (dim != kDim || prime_count != kRotorCount) {
        throw Error(ErrorCode::version_mismatch, "trace: unsupported geometry (dim " + std::to_string(dim) +
                                                     ", rotors " + std::to_string(prime_count) + ")");
    }
    if (precision != static_cast<std::uint8_t>(Precision::f32)) {
        throw Error(ErrorCode::version_mismatch, "trace: only single-precision traces are supported");
    }

    MemoryTrace trace;
    for (auto& p : trace.config.primes) p = r.u32();
    trace.config.synth_version = r.u32();
    const std::uint64_t token_count = r.u64();
    const std::uint64_t anchor_count = r.u64();
    if (anchor_count > token_count) corrupt("more anchors than tokens");
    // Minimum remaining size: anchors (10 bytes each) + states + CRC.
    const std::uint64_t state_bytes = (token_count + 1) * kDim * 4;
    if (token_count > (std::uint64_t{1} << 40) || anchor_count * 10 + state_bytes + 4 > r.remaining()) {
        throw Error(ErrorCode::truncated, "trace: file shorter than its declared contents");
    }

    trace.anchors.reserve(anchor_count);
    for (std::uint64_t i = 0; i < anchor_count; ++i) {
        Anchor a;
        a.position = r.u64();
        a.surface = std::string(r.bytes(r.u16()));
        trace.anchors.push_back(std::move(a));
    }
    trace.states.clear();
    trace.states.reserve(token_count + 1);
    bool in_range = true;
    for (std::uint64_t t = 0; t <= token_count; ++t) {
        Coords<float> c;
        for (float& x : c) {
            x = r.f32();
            in_range = in_range && x >= 0.0f && x < 1.0f;
        }
        trace.states.emplace_back(c);
    }
    const std::size_t body = r.position();
    const std::uint32_t stored = r.u32();
    if (crc32_of(bytes.substr(0, body)) != stored) throw Error(ErrorCode::checksum_mismatch, "trace: CRC32 mismatch");
    if (r.remaining() != 0) corrupt("trailing bytes after checksum");

    // Structural checks only make sense once the bytes are known to be intact.
    if (!in_range) corrupt("state coordinate outside [0, 1)");
    if (!(trace.states.front() == TorusState::zero())) corrupt("S_0 is not the zero state");
    for (std::size_t i = 0; i < trace.anchors.size(); ++i) {
        if (trace.anchors[i].position >= token_count) corrupt("anchor position out of range");
        if (i > 0 && trace.anchors[i].position <= trace.anchors[i - 1].position) corrupt("anchors not increasing");
    }
    try {
        (void)RotationOperator::from_primes(trace.config.primes);
    } catch (const Error& e) {
        corrupt(e.what());
    }
    return trace;
}

void write_trace(const MemoryTrace& trace, const std::string& path)
{
    detail::write_file(path, serialize_trace(trace));
}

MemoryTrace read_trace(const std::string& path)
{
    return deserialize_trace(detail::read_file(path));
}

} // namespace ptm
