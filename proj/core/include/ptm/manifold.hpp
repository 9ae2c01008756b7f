#pragma once

// Toroidal state arithmetic for the 16-dimensional memory manifold.
//
// A state is a point of T^16 = R^16 / Z^16, stored as coordinates in [0, 1).
// The clock is a block-diagonal rotation built from 8 planar rotors with
// angles pi*sqrt(p) for distinct primes p. Each rotor is evaluated as three
// lifting shears whose increments are snapped to a fixed dyadic grid, which
// makes the linear part exactly reversible in floating point on grid-aligned
// inputs (see rotate_lift / rotate_lift_inverse).
//
// Single precision is the physics mode; double precision exists as an oracle.

#include <array>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ptm {

inline constexpr std::size_t kDim = 16;
inline constexpr std::size_t kRotorCount = kDim / 2;

enum class Precision : std::uint8_t { f32 = 0, f64 = 1 };

template <class T>
concept Real = std::same_as<T, float> || std::same_as<T, double>;

template <Real T>
using Coords = std::array<T, kDim>;

/// x - floor(x), with the rounding corner case (tiny negative x -> 1.0) folded
/// back to 0 so the result is always in [0, 1).
template <Real T>
T reduce_mod1(T x) noexcept;

template <Real T>
class BasicTorusState {
public:
    using value_type = T;
    static constexpr Precision precision = std::same_as<T, float> ? Precision::f32 : Precision::f64;

    constexpr BasicTorusState() noexcept = default;

    /// Reduces every coordinate mod 1.
    explicit BasicTorusState(const Coords<T>& raw) noexcept;

    static constexpr BasicTorusState zero() noexcept { return {}; }

    T operator[](std::size_t i) const noexcept { return coords_[i]; }
    const Coords<T>& coords() const noexcept { return coords_; }

    friend bool operator==(const BasicTorusState&, const BasicTorusState&) = default;

private:
    Coords<T> coords_{};
};

using TorusState = BasicTorusState<float>;
using TorusStateF64 = BasicTorusState<double>;

/// Injected force: a phonetic fingerprint (unit L2 norm, non-negative) or the
/// all-zero padding vector.
template <Real T>
struct BasicForceVector {
    Coords<T> coords{};

    T operator[](std::size_t i) const noexcept { return coords[i]; }
    friend bool operator==(const BasicForceVector&, const BasicForceVector&) = default;
};

using ForceVector = BasicForceVector<float>;
using ForceVectorF64 = BasicForceVector<double>;

/// Passkey for constructors that exist only to reproduce rational-vs-irrational
/// contrasts in tests and stress tools.
struct TestOnly {
    explicit TestOnly() = default;
};

template <Real T>
struct ShearRotor {
    T a = 0;          // -tan(phi / 2)
    T b = 0;          // sin(phi)
    bool flip = false; // rotation by phi + pi, i.e. negate after shearing
};

class RotationOperator {
public:
    static constexpr std::array<std::uint32_t, kRotorCount> kDefaultPrimes{2, 3, 5, 7, 11, 13, 17, 19};

    /// Throws Error(invalid_argument) unless given 8 distinct primes.
    static RotationOperator from_primes(std::span<const std::uint32_t> primes);
    static RotationOperator standard() { return from_primes(kDefaultPrimes); }

    static RotationOperator from_angles(const std::array<double, kRotorCount>& angles, TestOnly);
    /// Every block rotates by 2*pi/q.
    static RotationOperator rational(std::uint32_t q, TestOnly);

    /// All zero for operators built from raw angles.
    const std::array<std::uint32_t, kRotorCount>& primes() const noexcept { return primes_; }
    /// theta_i in [0, 2*pi), double precision.
    const std::array<double, kRotorCount>& angles() const noexcept { return angles_; }

    template <Real T>
    T cos_of(std::size_t block) const noexcept;
    template <Real T>
    T sin_of(std::size_t block) const noexcept;

    template <Real T>
    const ShearRotor<T>& shear(std::size_t block) const noexcept;

    /// min over blocks of |e^{i theta} - 1| = 2|sin(theta/2)|; positive iff
    /// (R - I) is invertible.
    double min_eigen_gap() const noexcept;

private:
    explicit RotationOperator(const std::array<double, kRotorCount>& angles);

    std::array<std::uint32_t, kRotorCount> primes_{};
    std::array<double, kRotorCount> angles_{};
    std::array<double, kRotorCount> cos_{};
    std::array<double, kRotorCount> sin_{};
    std::array<float, kRotorCount> cos_f32_{};
    std::array<float, kRotorCount> sin_f32_{};
    std::array<ShearRotor<float>, kRotorCount> shear_f32_{};
    std::array<ShearRotor<double>, kRotorCount> shear_f64_{};
};

/// Spacing of the dyadic grid the shear increments are rounded to.
template <Real T>
constexpr T shear_grid() noexcept
{
    if constexpr (std::same_as<T, float>) {
        return 0x1p-22f;
    } else {
        return 0x1p-50;
    }
}

/// Rounds coordinates to the shear grid; grid-aligned lifts with block norm
/// <= sqrt(2) go through rotate_lift / rotate_lift_inverse without error.
template <Real T>
Coords<T> snap_to_shear_grid(const Coords<T>& x) noexcept;

/// Linear (pre-mod) block rotation of an unreduced coordinate vector.
template <Real T>
Coords<T> rotate_lift(const RotationOperator& rotation, const Coords<T>& x) noexcept;
template <Real T>
Coords<T> rotate_lift_inverse(const RotationOperator& rotation, const Coords<T>& x) noexcept;

/// Rotate each pair by theta_i, then reduce mod 1.
template <Real T>
BasicTorusState<T> apply(const RotationOperator& rotation, const BasicTorusState<T>& state) noexcept;

/// Rotate each pair by -theta_i, then reduce mod 1. This inverts apply() on
/// the lift only: rotate-then-reduce is not injective on the torus once a
/// coordinate wraps.
template <Real T>
BasicTorusState<T> apply_inverse(const RotationOperator& rotation, const BasicTorusState<T>& state) noexcept;

/// S_next = (R * S_prev + V) mod 1, evaluated rotate -> add -> reduce.
template <Real T>
BasicTorusState<T> evolve(const RotationOperator& rotation, const BasicTorusState<T>& prev,
                          const BasicForceVector<T>& force) noexcept;

/// V_rec = (S_t - R * S_prev) mod 1.
template <Real T>
BasicForceVector<T> invert_step(const RotationOperator& rotation, const BasicTorusState<T>& current,
                                const BasicTorusState<T>& prev) noexcept;

/// Lee (toroidal) distance; always accumulated in double.
template <Real T>
double torus_distance(const BasicTorusState<T>& u, const BasicTorusState<T>& v) noexcept;

struct DriftCheckpoint {
    std::uint64_t steps = 0;
    double error = 0.0;
};

struct DriftReport {
    double max_error = 0.0;
    std::vector<DriftCheckpoint> checkpoints;
};

/// Logarithmic 1-2-5 checkpoints up to `steps`, always ending at `steps`.
std::vector<std::uint64_t> drift_checkpoints(std::uint64_t steps);

/// For each checkpoint k: iterate the rotor k times forward and k times
/// backward from a fixed seeded, grid-aligned state and record the toroidal
/// distance to the start. Throws if steps == 0.
template <Real T>
DriftReport drift_stress(const RotationOperator& rotation, std::uint64_t steps);

/// The fixed start state used by drift_stress.
template <Real T>
Coords<T> drift_start_state() noexcept;

/// min over skip <= t <= horizon of dist(start, (R^t * start) mod 1), with R^t
/// realised by iterating the rotor on the lift.
template <Real T>
double orbit_min_return(const RotationOperator& rotation, const BasicTorusState<T>& start,
                        std::uint64_t horizon, std::uint64_t skip);

} // namespace ptm
