#include "twpa/chain.hpp"

#include <cmath>
#include <random>
#include <string>

#include "twpa/constants.hpp"
#include "twpa/errors.hpp"

namespace twpa::circuit {

void ChainConfig::validate() const {
    if (n_cells < 2) {
        throw InvalidChain("n_cells must be >= 2");
    }
    if (!(c_j > 0.0) || !(c_g > 0.0) || !(i_c_nominal > 0.0) || !(z0 > 0.0)) {
        throw InvalidChain("capacitances, critical current and z0 must be positive");
    }
    if (!(r > 0.0 && r < 1.0 / 3.0)) {
        throw InvalidChain("r must lie in (0, 1/3) for a tracked working point");
    }
    if (!(tan_delta >= 0.0)) {
        throw InvalidChain("tan_delta must be non-negative");
    }
    if (!(disorder_amplitude >= 0.0 && disorder_amplitude <= 0.2)) {
        throw InvalidChain("disorder_amplitude must lie in [0, 0.2]");
    }
    if (flux_polarity.empty()) {
        throw InvalidChain("flux_polarity pattern is empty");
    }
    for (int s : flux_polarity) {
        if (s != 1 && s != -1) {
            throw InvalidChain("flux_polarity entries must be +1 or -1, got " + std::to_string(s));
        }
    }
}

Chain build_chain(const ChainConfig& config, double flux_phi0, double f_ref) {
    config.validate();
    if (!(f_ref > 0.0)) {
        throw InvalidChain("ESR reference frequency must be positive");
    }
    Chain chain;
    chain.config = config;
    chain.flux_phi0 = flux_phi0;
    chain.f_ref = f_ref;
    chain.cells.resize(static_cast<std::size_t>(config.n_cells));

    std::mt19937_64 rng(config.rng_seed);
    const double a = config.disorder_amplitude;
    const double esr = config.tan_delta / (constants::two_pi * f_ref * config.c_g);
    const double phi_ext = snail::reduced_flux(flux_phi0);

    for (int k = 0; k < config.n_cells; ++k) {
        Cell& cell = chain.cells[static_cast<std::size_t>(k)];
        cell.large_deviation = a * (2.0 * unit_interval(rng()) - 1.0);
        cell.small_deviation = a * (2.0 * unit_interval(rng()) - 1.0);
        cell.polarity = config.polarity_of(k);
        cell.snail.i_c = config.i_c_nominal * (1.0 + cell.large_deviation);
        cell.snail.r = config.r * (1.0 + cell.small_deviation) / (1.0 + cell.large_deviation);
        cell.snail.phi_ext = cell.polarity * phi_ext;
        cell.phi_star = snail::find_phi_star(cell.snail);
        cell.esr = esr;
    }
    return chain;
}

}  // namespace twpa::circuit
