#pragma once

#include <numbers>

namespace xqd {

// Internal units: eV for energy, angstrom for length, radians for angles,
// nanoseconds for time. Conversions happen at the IO boundary only.

inline constexpr double kPi = std::numbers::pi;

/// Planck constant times c, eV * angstrom, from the exact SI values of h, c and e.
inline constexpr double kHc = 12398.419843320026;
inline constexpr double kHbarC = kHc / (2.0 * kPi);

constexpr double deg_to_rad(double deg) noexcept { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / kPi; }

/// Vacuum wavenumber |k| = E / (hbar c), in inverse angstrom.
constexpr double wavenumber(double energy_ev) noexcept { return energy_ev / kHbarC; }

inline constexpr double kNsPerSecond = 1e9;

}  // namespace xqd
