#include "ptm/detmath.hpp"

#include <cmath>

namespace ptm::detmath {
namespace {

// Cody-Waite split of pi/2 (fdlibm constants); the leading parts carry 33
// significant bits so k * part is exact for |k| < 2^20.
constexpr double kInvPio2 = 6.36619772367581382433e-01;
constexpr double kPio2Hi = 1.57079632673412561417e+00;
constexpr double kPio2Mid = 6.07710050630396597660e-11;
constexpr double kPio2Lo = 2.02226624879595063154e-21;

double kernel_sin(double x) noexcept
{
    constexpr double s1 = -1.66666666666666324348e-01;
    constexpr double s2 = 8.33333333332248946124e-03;
    constexpr double s3 = -1.98412698298579493134e-04;
    constexpr double s4 = 2.75573137070700676789e-06;
    constexpr double s5 = -2.50507602534068634195e-08;
    constexpr double s6 = 1.58969099521155010221e-10;
    const double z = x * x;
    const double r = s2 + z * (s3 + z * (s4 + z * (s5 + z * s6)));
    return x + (x * z) * (s1 + z * r);
}

double kernel_cos(double x) noexcept
{
    constexpr double c1 = 4.16666666666666019037e-02;
    constexpr double c2 = -1.38888888888741095749e-03;
    constexpr double c3 = 2.48015872894767294178e-05;
    constexpr double c4 = -2.75573143513906633035e-07;
    constexpr double c5 = 2.08757232129817482790e-09;
    constexpr double c6 = -1.13596475577881948265e-11;
    const double z = x * x;
    const double r = z * (c1 + z * (c2 + z * (c3 + z * (c4 + z * (c5 + z * c6)))));
    const double hz = 0.5 * z;
    const double w = 1.0 - hz;
    return w + (((1.0 - w) - hz) + z * r);
}

struct Reduced {
    double r;
    long quadrant;
};

Reduced reduce(double x) noexcept
{
    const double k = std::nearbyint(x * kInvPio2);
    double r = x - k * kPio2Hi;
    r -= k * kPio2Mid;
    r -= k * kPio2Lo;
    return {r, static_cast<long>(k)};
}

} // namespace

double sin(double x) noexcept
{
    const auto [r, q] = reduce(x);
    switch (q & 3) {
    case 0: return kernel_sin(r);
    case 1: return kernel_cos(r);
    case 2: return -kernel_sin(r);
    default: return -kernel_cos(r);
    }
}

double cos(double x) noexcept
{
    const auto [r, q] = reduce(x);
    switch (q & 3) {
    case 0: return kernel_cos(r);
    case 1: return -kernel_sin(r);
    case 2: return -kernel_cos(r);
    default: return kernel_sin(r);
    }
}

double sin_turns(double turns) noexcept
{
    const double frac = turns - std::nearbyint(turns);
    return sin(frac * kTwoPi);
}

} // namespace ptm::detmath
