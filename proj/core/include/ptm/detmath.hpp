#pragma once

// Trigonometry built only from IEEE-754 +, * and round-to-integer, so results
// are bit-identical on every conforming platform (libm sin/cos are not).
// Accurate to a couple of ulps for |x| < 1e6.

namespace ptm::detmath {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;

double sin(double x) noexcept;
double cos(double x) noexcept;

/// sin(2*pi*turns) for a phase expressed in turns; exact reduction of the
/// integer part keeps long oscillator runs reproducible.
double sin_turns(double turns) noexcept;

} // namespace ptm::detmath
