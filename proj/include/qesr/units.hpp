#pragma once

#include <numbers>

namespace qesr {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Configuration files quote every frequency and rate as f = ω/2π in Hz.
// The library works in angular units (rad/s) throughout; these two helpers
// are the only conversion points.
constexpr double hz_to_angular(double hz) noexcept { return two_pi * hz; }
constexpr double angular_to_hz(double omega) noexcept { return omega / two_pi; }

}  // namespace qesr
