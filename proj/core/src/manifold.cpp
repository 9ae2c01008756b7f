#include "ptm/manifold.hpp"

#include "ptm/detmath.hpp"
#include "ptm/error.hpp"
#include "mix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ptm {
namespace {

bool is_prime(std::uint32_t n) noexcept
{
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::uint64_t d = 3; d * d <= n; d += 2) {
        if (n % d == 0) return false;
    }
    return true;
}

template <Real T>
T shear_step(T coeff, T other) noexcept
{
    constexpr T scale = T(1) / shear_grid<T>();
    return std::nearbyint(coeff * other * scale) * shear_grid<T>();
}

template <Real T>
ShearRotor<T> make_shear(double theta) noexcept
{
    // Fold to |phi| <= pi/2 so |tan(phi/2)| <= 1 and every intermediate of a
    // block with norm <= sqrt(2) stays below 4 (exact on the grid).
    const double k = std::nearbyint(theta / detmath::kPi);
    const double phi = theta - k * detmath::kPi;
    const double half = 0.5 * phi;
    ShearRotor<T> r;
    r.a = static_cast<T>(-detmath::sin(half) / detmath::cos(half));
    r.b = static_cast<T>(detmath::sin(phi));
    r.flip = (static_cast<long long>(k) % 2) != 0;
    return r;
}

} // namespace

template <Real T>
T reduce_mod1(T x) noexcept
{
    T r = x - std::floor(x);
    if (!(r < T(1))) r = T(0);
    return r;
}

template <Real T>
BasicTorusState<T>::BasicTorusState(const Coords<T>& raw) noexcept
{
    for (std::size_t i = 0; i < kDim; ++i) coords_[i] = reduce_mod1(raw[i]);
}

// ---------------------------------------------------------------------------
// RotationOperator

RotationOperator::RotationOperator(const std::array<double, kRotorCount>& angles)
{
    for (std::size_t i = 0; i < kRotorCount; ++i) {
        const double theta = std::fmod(angles[i], detmath::kTwoPi);
        angles_[i] = theta < 0 ? theta + detmath::kTwoPi : theta;
        cos_[i] = detmath::cos(angles_[i]);
        sin_[i] = detmath::sin(angles_[i]);
        cos_f32_[i] = static_cast<float>(cos_[i]);
        sin_f32_[i] = static_cast<float>(sin_[i]);
        shear_f32_[i] = make_shear<float>(angles_[i]);
        shear_f64_[i] = make_shear<double>(angles_[i]);
    }
}

RotationOperator RotationOperator::from_primes(std::span<const std::uint32_t> primes)
{
    if (primes.size() != kRotorCount) {
        throw Error(ErrorCode::invalid_argument,
                    "rotation needs exactly 8 primes, got " + std::to_string(primes.size()));
    }
    for (std::size_t i = 0; i < primes.size(); ++i) {
        if (!is_prime(primes[i])) {
            throw Error(ErrorCode::invalid_argument, std::to_string(primes[i]) + " is not prime");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (primes[j] == primes[i]) {
                throw Error(ErrorCode::invalid_argument,
                            "duplicate prime " + std::to_string(primes[i]));
            }
        }
    }
    std::array<double, kRotorCount> angles{};
    for (std::size_t i = 0; i < kRotorCount; ++i) {
        angles[i] = detmath::kPi * std::sqrt(static_cast<double>(primes[i]));
    }
    RotationOperator op(angles);
    std::copy(primes.begin(), primes.end(), op.primes_.begin());
    return op;
}

RotationOperator RotationOperator::from_angles(const std::array<double, kRotorCount>& angles, TestOnly)
{
    return RotationOperator(angles);
}

RotationOperator RotationOperator::rational(std::uint32_t q, TestOnly)
{
    if (q == 0) throw Error(ErrorCode::invalid_argument, "rational rotation needs q >= 1");
    std::array<double, kRotorCount> angles{};
    angles.fill(detmath::kTwoPi / static_cast<double>(q));
    return RotationOperator(angles);
}

template <>
float RotationOperator::cos_of<float>(std::size_t block) const noexcept { return cos_f32_[block]; }
template <>
double RotationOperator::cos_of<double>(std::size_t block) const noexcept { return cos_[block]; }
template <>
float RotationOperator::sin_of<float>(std::size_t block) const noexcept { return sin_f32_[block]; }
template <>
double RotationOperator::sin_of<double>(std::size_t block) const noexcept { return sin_[block]; }

template <>
const ShearRotor<float>& RotationOperator::shear<float>(std::size_t block) const noexcept
{
    return shear_f32_[block];
}
template <>
const ShearRotor<double>& RotationOperator::shear<double>(std::size_t block) const noexcept
{
    return shear_f64_[block];
}

double RotationOperator::min_eigen_gap() const noexcept
{
    double gap = 2.0;
    for (double theta : angles_) gap = std::min(gap, 2.0 * std::abs(detmath::sin(0.5 * theta)));
    return gap;
}

// ---------------------------------------------------------------------------
// Rotor arithmetic

template <Real T>
Coords<T> snap_to_shear_grid(const Coords<T>& x) noexcept
{
    constexpr T scale = T(1) / shear_grid<T>();
    Coords<T> out{};
    for (std::size_t i = 0; i < kDim; ++i) out[i] = std::nearbyint(x[i] * scale) * shear_grid<T>();
    return out;
}

template <Real T>
Coords<T> rotate_lift(const RotationOperator& rotation, const Coords<T>& x) noexcept
{
    Coords<T> out{};
    for (std::size_t k = 0; k < kRotorCount; ++k) {
        const ShearRotor<T>& r = rotation.shear<T>(k);
        T u = x[2 * k];
        T v = x[2 * k + 1];
        u = u + shear_step(r.a, v);
        v = v + shear_step(r.b, u);
        u = u + shear_step(r.a, v);
        if (r.flip) {
            u = -u;
            v = -v;
        }
        out[2 * k] = u;
        out[2 * k + 1] = v;
    }
    return out;
}

template <Real T>
Coords<T> rotate_lift_inverse(const RotationOperator& rotation, const Coords<T>& x) noexcept
{
    Coords<T> out{};
    for (std::size_t k = 0; k < kRotorCount; ++k) {
        const ShearRotor<T>& r = rotation.shear<T>(k);
        T u = x[2 * k];
        T v = x[2 * k + 1];
        if (r.flip) {
            u = -u;
            v = -v;
        }
        u = u - shear_step(r.a, v);
        v = v - shear_step(r.b, u);
        u = u - shear_step(r.a, v);
        out[2 * k] = u;
        out[2 * k + 1] = v;
    }
    return out;
}

template <Real T>
BasicTorusState<T> apply(const RotationOperator& rotation, const BasicTorusState<T>& state) noexcept
{
    return BasicTorusState<T>(rotate_lift(rotation, state.coords()));
}

template <Real T>
BasicTorusState<T> apply_inverse(const RotationOperator& rotation, const BasicTorusState<T>& state) noexcept
{
    return BasicTorusState<T>(rotate_lift_inverse(rotation, state.coords()));
}

template <Real T>
BasicTorusState<T> evolve(const RotationOperator& rotation, const BasicTorusState<T>& prev,
                          const BasicForceVector<T>& force) noexcept
{
    Coords<T> x = rotate_lift(rotation, prev.coords());
    for (std::size_t i = 0; i < kDim; ++i) x[i] = x[i] + force.coords[i];
    return BasicTorusState<T>(x);
}

template <Real T>
BasicForceVector<T> invert_step(const RotationOperator& rotation, const BasicTorusState<T>& current,
                                const BasicTorusState<T>& prev) noexcept
{
    const Coords<T> rotated = rotate_lift(rotation, prev.coords());
    BasicForceVector<T> v;
    for (std::size_t i = 0; i < kDim; ++i) v.coords[i] = reduce_mod1(current[i] - rotated[i]);
    return v;
}

template <Real T>
double torus_distance(const BasicTorusState<T>& u, const BasicTorusState<T>& v) noexcept
{
    double sum = 0.0;
    for (std::size_t i = 0; i < kDim; ++i) {
        const double d = std::abs(static_cast<double>(u[i]) - static_cast<double>(v[i]));
        const double w = std::min(d, 1.0 - d);
        sum += w * w;
    }
    return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Stress harnesses

std::vector<std::uint64_t> drift_checkpoints(std::uint64_t steps)
{
    std::vector<std::uint64_t> out;
    for (std::uint64_t decade = 1; decade <= steps; decade *= 10) {
        for (std::uint64_t m : {1u, 2u, 5u}) {
            const std::uint64_t c = decade * m;
            if (c < steps) out.push_back(c);
        }
        if (decade > steps / 10) break;
    }
    out.push_back(steps);
    return out;
}

template <Real T>
Coords<T> drift_start_state() noexcept
{
    std::uint64_t seed = 0x5EED'D41F7ULL;
    Coords<T> x{};
    for (auto& c : x) c = static_cast<T>(detail::unit_interval(detail::splitmix64(seed)));
    return snap_to_shear_grid(x);
}

template <Real T>
DriftReport drift_stress(const RotationOperator& rotation, std::uint64_t steps)
{
    if (steps == 0) throw Error(ErrorCode::invalid_argument, "drift_stress needs steps >= 1");
    const Coords<T> start = drift_start_state<T>();
    const BasicTorusState<T> start_state(start);

    DriftReport report;
    for (std::uint64_t checkpoint : drift_checkpoints(steps)) {
        Coords<T> x = start;
        for (std::uint64_t t = 0; t < checkpoint; ++t) x = rotate_lift(rotation, x);
        for (std::uint64_t t = 0; t < checkpoint; ++t) x = rotate_lift_inverse(rotation, x);
        const double err = torus_distance(BasicTorusState<T>(x), start_state);
        report.checkpoints.push_back({checkpoint, err});
        report.max_error = std::max(report.max_error, err);
    }
    return report;
}

template <Real T>
double orbit_min_return(const RotationOperator& rotation, const BasicTorusState<T>& start,
                        std::uint64_t horizon, std::uint64_t skip)
{
    if (skip < 1 || horizon < skip) {
        throw Error(ErrorCode::invalid_argument, "orbit_min_return needs horizon >= skip >= 1");
    }
    Coords<T> x = start.coords();
    double best = 2.0;
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        x = rotate_lift(rotation, x);
        if (t >= skip) best = std::min(best, torus_distance(BasicTorusState<T>(x), start));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Explicit instantiations

#define PTM_INSTANTIATE(T)                                                                          \
    template T reduce_mod1<T>(T) noexcept;                                                          \
    template class BasicTorusState<T>;                                                              \
    template Coords<T> snap_to_shear_grid<T>(const Coords<T>&) noexcept;                            \
    template Coords<T> rotate_lift<T>(const RotationOperator&, const Coords<T>&) noexcept;          \
    template Coords<T> rotate_lift_inverse<T>(const RotationOperator&, const Coords<T>&) noexcept;  \
    template BasicTorusState<T> apply<T>(const RotationOperator&, const BasicTorusState<T>&) noexcept; \
    template BasicTorusState<T> apply_inverse<T>(const RotationOperator&,                           \
                                                 const BasicTorusState<T>&) noexcept;               \
    template BasicTorusState<T> evolve<T>(const RotationOperator&, const BasicTorusState<T>&,       \
                                          const BasicForceVector<T>&) noexcept;                     \
    template BasicForceVector<T> invert_step<T>(const RotationOperator&, const BasicTorusState<T>&, \
                                                const BasicTorusState<T>&) noexcept;                \
    template double torus_distance<T>(const BasicTorusState<T>&, const BasicTorusState<T>&) noexcept; \
    template Coords<T> drift_start_state<T>() noexcept;                                             \
    template DriftReport drift_stress<T>(const RotationOperator&, std::uint64_t);                   \
    template double orbit_min_return<T>(const RotationOperator&, const BasicTorusState<T>&,         \
                                        std::uint64_t, std::uint64_t);

PTM_INSTANTIATE(float)
PTM_INSTANTIATE(double)

#undef PTM_INSTANTIATE

} // namespace ptm
