#pragma once

#include <cstdint>
#include <vector>

#include "twpa/snail.hpp"

namespace twpa::circuit {

/// Device description. Defaults are the adopted 700-cell SNAIL line.
struct ChainConfig {
    int n_cells = 700;
    double c_j = 50e-15;          // [F], across each SNAIL
    double c_g = 250e-15;         // [F], shunt to ground per cell
    double i_c_nominal = 2.19e-6; // [A], large junctions
    double r = 0.07;
    double tan_delta = 2.1e-3;    // dielectric loss of C_g
    std::vector<int> flux_polarity{+1, -1};  // repeated cyclically along the line
    double disorder_amplitude = 0.05;        // fractional half-width of the Ic spread
    std::uint64_t rng_seed = 1;
    double z0 = 50.0;             // port impedance [ohm]

    /// Throws InvalidChain.
    void validate() const;

    [[nodiscard]] int polarity_of(int cell) const {
        return flux_polarity[static_cast<std::size_t>(cell) % flux_polarity.size()];
    }
};

struct Cell {
    snail::SnailParams snail;  // phi_ext already carries the cell's polarity
    double phi_star = 0.0;
    int polarity = +1;
    double esr = 0.0;          // series resistance of C_g [ohm]
    double large_deviation = 0.0;  // drawn fractional Ic deviation, large-junction arm
    double small_deviation = 0.0;  // drawn fractional Ic deviation, small junction
};

struct Chain {
    ChainConfig config;
    double flux_phi0 = 0.0;
    double f_ref = 0.0;  // ESR reference frequency [Hz]
    std::vector<Cell> cells;
};

/// Uniform deviate in [0, 1) from the top 53 bits of a 64-bit word.
[[nodiscard]] constexpr double unit_interval(std::uint64_t word) noexcept {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

/// Realize the chain at one flux bias (Phi0 units).
///
/// Disorder: a std::mt19937_64 seeded with rng_seed is drawn twice per cell,
/// first for the three-junction arm and then for the small junction; each
/// word u maps to the deviation a * (2 * unit_interval(u) - 1). The arm
/// scales Ic, the small junction scales r * Ic, so the cell keeps the
/// two-sine current relation with r_cell = r (1 + d_small) / (1 + d_large).
///
/// ESR of each C_g is tan_delta / (2 pi f_ref C_g).
[[nodiscard]] Chain build_chain(const ChainConfig& config, double flux_phi0, double f_ref);

}  // namespace twpa::circuit
