#pragma once

// Power spectrum and log-band binning behind the phonetic fingerprint.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace ptm::spectrum {

inline constexpr std::size_t kBands = 16;

std::size_t next_pow2(std::size_t n) noexcept;

/// |X_k|^2 for k = 0..N/2 of the real input zero-padded to N = next_pow2(size).
/// Deterministic radix-2 transform with tabulated twiddles.
std::vector<double> power_spectrum(std::span<const float> samples);

/// 17 edges, log-spaced from low_hz to high_hz.
std::array<double, kBands + 1> band_edges(double low_hz, double high_hz);

/// Band b collects bins with edge[b] <= f < edge[b+1]; the top band also keeps
/// f == edge[16]. Bins outside the range are dropped.
std::array<double, kBands> bin_bands(std::span<const double> power, std::size_t fft_size,
                                     double sample_rate, const std::array<double, kBands + 1>& edges);

} // namespace ptm::spectrum
