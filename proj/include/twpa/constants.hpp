#pragma once

#include <numbers>

namespace twpa::constants {

// CODATA 2018 exact SI values.
inline constexpr double planck = 6.62607015e-34;           // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double boltzmann = 1.380649e-23;           // J/K

/// Magnetic flux quantum h/(2e), in webers.
inline constexpr double flux_quantum = planck / (2.0 * elementary_charge);

/// Reduced flux quantum Phi0 / (2 pi).
inline constexpr double reduced_flux_quantum = flux_quantum / (2.0 * std::numbers::pi);

inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace twpa::constants
