#include "ptm/spectrum.hpp"

#include "ptm/detmath.hpp"

#include <bit>
#include <cmath>
#include <mutex>

namespace ptm::spectrum {
namespace {

constexpr std::size_t kMaxLog2 = 30;

struct Twiddles {
    std::vector<double> re; // cos(2*pi*k/N), k < N/2
    std::vector<double> im; // -sin(2*pi*k/N)
    // Per-stage copies for the N/2-point transform, stage `len` stored
    // contiguously from offset len/2 - 1.
    std::vector<double> stage_re;
    std::vector<double> stage_im;
};

const Twiddles& twiddles(std::size_t n)
{
    static std::array<Twiddles, kMaxLog2 + 1> tables;
    static std::array<std::once_flag, kMaxLog2 + 1> flags;
    const auto log2n = static_cast<std::size_t>(std::countr_zero(n));
    std::call_once(flags[log2n], [&] {
        Twiddles& t = tables[log2n];
        const std::size_t half = n / 2;
        t.re.resize(half);
        t.im.resize(half);
        for (std::size_t k = 0; k < half; ++k) {
            const double angle = detmath::kTwoPi * static_cast<double>(k) / static_cast<double>(n);
            t.re[k] = detmath::cos(angle);
            t.im[k] = -detmath::sin(angle);
        }
        const std::size_t m = half;
        t.stage_re.resize(m > 0 ? m - 1 : 0);
        t.stage_im.resize(t.stage_re.size());
        for (std::size_t len = 2; len <= m; len <<= 1) {
            const std::size_t step = n / len;
            for (std::size_t j = 0; j < len / 2; ++j) {
                t.stage_re[len / 2 - 1 + j] = t.re[j * step];
                t.stage_im[len / 2 - 1 + j] = t.im[j * step];
            }
        }
    });
    return tables[log2n];
}

// In-place iterative radix-2 DIT transform of length N/2 for the table's N.
void fft_inplace(std::vector<double>& re, std::vector<double>& im, const Twiddles& tw)
{
    const std::size_t m = re.size();
    for (std::size_t i = 1, j = 0; i < m; ++i) {
        std::size_t bit = m >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    double* xr = re.data();
    double* xi = im.data();
    for (std::size_t len = 2; len <= m; len <<= 1) {
        const std::size_t half = len / 2;
        const double* wr = tw.stage_re.data() + (half - 1);
        const double* wi = tw.stage_im.data() + (half - 1);
        for (std::size_t base = 0; base < m; base += len) {
            double* ar = xr + base;
            double* ai = xi + base;
            double* br = ar + half;
            double* bi = ai + half;
            for (std::size_t j = 0; j < half; ++j) {
                const double tr = br[j] * wr[j] - bi[j] * wi[j];
                const double ti = br[j] * wi[j] + bi[j] * wr[j];
                br[j] = ar[j] - tr;
                bi[j] = ai[j] - ti;
                ar[j] = ar[j] + tr;
                ai[j] = ai[j] + ti;
            }
        }
    }
}

} // namespace

std::size_t next_pow2(std::size_t n) noexcept
{
    return n <= 1 ? 1 : std::bit_ceil(n);
}

std::vector<double> power_spectrum(std::span<const float> samples)
{
    const std::size_t n = std::max<std::size_t>(2, next_pow2(samples.size()));
    const std::size_t m = n / 2;
    const Twiddles& tw = twiddles(n);

    // Pack the real signal as m complex samples, transform once, then split
    // the even/odd halves back out.
    std::vector<double> re(m, 0.0);
    std::vector<double> im(m, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i % 2 == 0) {
            re[i / 2] = samples[i];
        } else {
            im[i / 2] = samples[i];
        }
    }
    fft_inplace(re, im, tw);

    std::vector<double> power(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
        const std::size_t k1 = k % m;
        const std::size_t k2 = (m - k) % m;
        // E = (Z[k] + conj Z[m-k]) / 2, O = (Z[k] - conj Z[m-k]) / (2i)
        const double er = 0.5 * (re[k1] + re[k2]);
        const double ei = 0.5 * (im[k1] - im[k2]);
        const double or_ = 0.5 * (im[k1] + im[k2]);
        const double oi = -0.5 * (re[k1] - re[k2]);
        double wr = -1.0;
        double wi = 0.0;
        if (k < m) {
            wr = tw.re[k];
            wi = tw.im[k];
        }
        const double xr = er + (or_ * wr - oi * wi);
        const double xi = ei + (or_ * wi + oi * wr);
        power[k] = xr * xr + xi * xi;
    }
    return power;
}

std::array<double, kBands + 1> band_edges(double low_hz, double high_hz)
{
    // 16th root by repeated square roots keeps the edges IEEE-exact.
    double ratio = high_hz / low_hz;
    for (int i = 0; i < 4; ++i) ratio = std::sqrt(ratio);
    std::array<double, kBands + 1> edges{};
    edges[0] = low_hz;
    for (std::size_t b = 1; b < kBands; ++b) edges[b] = edges[b - 1] * ratio;
    edges[kBands] = high_hz;
    return edges;
}

std::array<double, kBands> bin_bands(std::span<const double> power, std::size_t fft_size,
                                     double sample_rate, const std::array<double, kBands + 1>& edges)
{
    std::array<double, kBands> bands{};
    const double bin_hz = sample_rate / static_cast<double>(fft_size);
    std::size_t band = 0;
    for (std::size_t k = 0; k < power.size(); ++k) {
        const double f = static_cast<double>(k) * bin_hz;
        if (f < edges[0]) continue;
        if (f > edges[kBands]) break;
        while (band + 1 < kBands && f >= edges[band + 1]) ++band;
        bands[band] += power[k];
    }
    return bands;
}

} // namespace ptm::spectrum
