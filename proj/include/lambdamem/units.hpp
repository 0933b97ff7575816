#pragma once

#include <numbers>

// Unit conventions used throughout the library:
//   time            ns
//   angular rates   rad/ns   (so 2*pi*0.1 rad/ns == 2*pi x 100 MHz)
//   lengths         mm (cell), um (beam waists)
// Config files and CLI flags take plain frequencies in MHz; the loader converts
// with mhz_to_radns below. Keeping solver numbers O(1) avoids , e.g., 1e9 factors
// in the stiff diagonal terms.

namespace lambdamem {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA constants, SI.
inline constexpr double kBoltzmannJPerK = 1.380649e-23;
inline constexpr double kAmuKg = 1.66053906660e-27;

inline constexpr double mhz_to_radns(double mhz) { return kTwoPi * mhz * 1e-3; }
inline constexpr double radns_to_mhz(double radns) { return radns / kTwoPi * 1e3; }

}  // namespace lambdamem
