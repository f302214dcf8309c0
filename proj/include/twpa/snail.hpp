#pragma once

// Current-phase relation of a single SNAIL (one small junction r*Ic in
// parallel with a series array of three junctions Ic) and its Taylor
// coefficients around the zero-current working point phi*.

#include <optional>
#include <span>
#include <vector>

#include "twpa/constants.hpp"

namespace twpa::snail {

struct SnailParams {
    double r = 0.07;        // small/large junction ratio, 0 < r < 1
    double i_c = 2.19e-6;   // large-junction critical current [A]
    double phi_ext = 0.0;   // reduced external flux 2*pi*Phi_ext/Phi0 [rad]

    /// Throws std::invalid_argument when r, i_c or phi_ext violate their ranges.
    void validate() const;
};

struct SnailCoefficients {
    double phi_star = 0.0;     // zero-current working point [rad]
    double alpha_tilde = 0.0;  // linear coefficient
    double beta = 0.0;         // three-wave-mixing coefficient
    double gamma = 0.0;        // four-wave-mixing coefficient
    double inductance = 0.0;   // small-signal inductance Phi0 / (2 pi alpha_tilde Ic) [H]
};

/// Reduced flux in radians from a flux given in units of Phi0.
[[nodiscard]] constexpr double reduced_flux(double flux_phi0) noexcept {
    return constants::two_pi * flux_phi0;
}

[[nodiscard]] double snail_current(double phi, const SnailParams& params);

/// dI/dphi, exact.
[[nodiscard]] double snail_current_derivative(double phi, const SnailParams& params);

/// Root of snail_current on the branch continuously connected to phi* = 0 at
/// phi_ext = 0. Requires r < 1/3.
///
/// The branch is periodic in the sense phi*(phi_ext + 2 pi) = phi*(phi_ext) + 2 pi,
/// so the search is reduced to phi_ext in [-pi, pi] where the root is
/// bracketed by [0, phi_ext]. A guess (typically the previous point of a flux
/// sweep) seeds Newton; the result is accepted only if it stays on the
/// bracketed branch, otherwise safeguarded bisection takes over.
///
/// Throws NoConvergence when no root with |I| < 1e-12 Ic is found in 100
/// iterations.
[[nodiscard]] double find_phi_star(const SnailParams& params,
                                   std::optional<double> guess = std::nullopt);

[[nodiscard]] SnailCoefficients coefficients(const SnailParams& params,
                                             std::optional<double> phi_star_guess = std::nullopt);

/// Coefficients over a flux grid (Phi0 units) with phi* warm-started from the
/// previous grid point.
[[nodiscard]] std::vector<SnailCoefficients> coefficient_sweep(double r, double i_c,
                                                               std::span<const double> flux_phi0);

/// Flux values (Phi0) where gamma changes sign, linearly interpolated
/// between neighbouring grid points.
[[nodiscard]] std::vector<double> gamma_zero_crossings(std::span<const double> flux_phi0,
                                                       std::span<const SnailCoefficients> coeffs);

struct BetaExtremum {
    double flux_phi0 = 0.0;
    double beta = 0.0;
};

/// Interior local extrema of beta over a sweep, refined by the parabola
/// through the extremal grid point and its two neighbours.
[[nodiscard]] std::vector<BetaExtremum> beta_extrema(std::span<const double> flux_phi0,
                                                     std::span<const SnailCoefficients> coeffs);

}  // namespace twpa::snail
