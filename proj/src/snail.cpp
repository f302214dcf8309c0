#include "twpa/snail.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "twpa/errors.hpp"

namespace twpa::snail {

namespace {
constexpr double kResidualTol = 1e-12;  // relative to Ic
constexpr int kMaxIterations = 100;

// I / Ic
double normalized_current(double phi, double r, double phi_ext) {
    return r * std::sin(phi) + std::sin((phi - phi_ext) / 3.0);
}

double normalized_slope(double phi, double r, double phi_ext) {
    return r * std::cos(phi) + std::cos((phi - phi_ext) / 3.0) / 3.0;
}

// Root on [0, phi_red] for phi_red in [0, pi]. I(0) <= 0 <= I(phi_red) there.
double principal_root(double r, double phi_red, std::optional<double> guess) {
    if (phi_red == 0.0) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = phi_red;

    if (guess && *guess >= lo && *guess <= hi) {
        double x = *guess;
        for (int it = 0; it < kMaxIterations; ++it) {
            const double f = normalized_current(x, r, phi_red);
            if (std::abs(f) < kResidualTol) {
                return x;
            }
            const double d = normalized_slope(x, r, phi_red);
            if (d <= 0.0) {
                break;
            }
            x -= f / d;
            if (x < lo || x > hi) {
                break;
            }
        }
    }

    // Safeguarded Newton (bisection whenever the Newton step leaves the bracket).
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 4 * kMaxIterations; ++it) {
        const double f = normalized_current(x, r, phi_red);
        if (std::abs(f) < kResidualTol) {
            return x;
        }
        if (f < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double d = normalized_slope(x, r, phi_red);
        double next = d > 0.0 ? x - f / d : lo - 1.0;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next == x) {
            break;
        }
        x = next;
    }
    const double f = normalized_current(x, r, phi_red);
    if (std::abs(f) < kResidualTol) {
        return x;
    }
    throw NoConvergence("phi* search stalled at phi=" + std::to_string(x) +
                        " residual=" + std::to_string(f) + " (r=" + std::to_string(r) +
                        ", phi_ext=" + std::to_string(phi_red) + ")");
}
}  // namespace

void SnailParams::validate() const {
    if (!(r > 0.0 && r < 1.0)) {
        throw std::invalid_argument("SNAIL ratio r must lie in (0, 1)");
    }
    if (!(i_c > 0.0) || !std::isfinite(i_c)) {
        throw std::invalid_argument("critical current must be positive");
    }
    if (!std::isfinite(phi_ext)) {
        throw std::invalid_argument("external flux must be finite");
    }
}

double snail_current(double phi, const SnailParams& params) {
    return params.i_c * normalized_current(phi, params.r, params.phi_ext);
}

double snail_current_derivative(double phi, const SnailParams& params) {
    return params.i_c * normalized_slope(phi, params.r, params.phi_ext);
}

double find_phi_star(const SnailParams& params, std::optional<double> guess) {
    params.validate();
    if (params.r >= 1.0 / 3.0) {
        throw std::invalid_argument("phi* branch tracking requires r < 1/3");
    }
    // phi*(phi_ext + 2 pi m) = phi*(phi_ext) + 2 pi m and phi*(-phi_ext) = -phi*(phi_ext).
    const double m = std::round(params.phi_ext / constants::two_pi);
    const double reduced = params.phi_ext - constants::two_pi * m;
    const double sign = reduced < 0.0 ? -1.0 : 1.0;
    const double offset = constants::two_pi * m;

    std::optional<double> reduced_guess;
    if (guess) {
        reduced_guess = sign * (*guess - offset);
    }
    return sign * principal_root(params.r, sign * reduced, reduced_guess) + offset;
}

SnailCoefficients coefficients(const SnailParams& params, std::optional<double> phi_star_guess) {
    SnailCoefficients c;
    c.phi_star = find_phi_star(params, phi_star_guess);
    const double inner = (c.phi_star - params.phi_ext) / 3.0;
    c.alpha_tilde = params.r * std::cos(c.phi_star) + std::cos(inner) / 3.0;
    c.beta = 0.5 * (params.r * std::sin(c.phi_star) + std::sin(inner) / 9.0) / c.alpha_tilde;
    c.gamma = (params.r * std::cos(c.phi_star) + std::cos(inner) / 27.0) / 6.0 / c.alpha_tilde;
    c.inductance = constants::reduced_flux_quantum / (c.alpha_tilde * params.i_c);
    return c;
}

std::vector<SnailCoefficients> coefficient_sweep(double r, double i_c,
                                                 std::span<const double> flux_phi0) {
    std::vector<SnailCoefficients> out;
    out.reserve(flux_phi0.size());
    std::optional<double> guess;
    for (double flux : flux_phi0) {
        SnailParams p{r, i_c, reduced_flux(flux)};
        out.push_back(coefficients(p, guess));
        guess = out.back().phi_star;
    }
    return out;
}

std::vector<double> gamma_zero_crossings(std::span<const double> flux_phi0,
                                         std::span<const SnailCoefficients> coeffs) {
    if (flux_phi0.size() != coeffs.size()) {
        throw std::invalid_argument("flux grid and coefficient sweep differ in length");
    }
    std::vector<double> out;
    for (std::size_t i = 1; i < coeffs.size(); ++i) {
        const double g0 = coeffs[i - 1].gamma;
        const double g1 = coeffs[i].gamma;
        if (g0 == 0.0) {
            if (i == 1 || coeffs[i - 2].gamma * g1 < 0.0) {
                out.push_back(flux_phi0[i - 1]);
            }
        } else if (g0 * g1 < 0.0) {
            out.push_back(flux_phi0[i - 1] + (flux_phi0[i] - flux_phi0[i - 1]) * g0 / (g0 - g1));
        }
    }
    return out;
}

std::vector<BetaExtremum> beta_extrema(std::span<const double> flux_phi0,
                                       std::span<const SnailCoefficients> coeffs) {
    if (flux_phi0.size() != coeffs.size()) {
        throw std::invalid_argument("flux grid and coefficient sweep differ in length");
    }
    std::vector<BetaExtremum> out;
    for (std::size_t i = 1; i + 1 < coeffs.size(); ++i) {
        const double b0 = coeffs[i - 1].beta;
        const double b1 = coeffs[i].beta;
        const double b2 = coeffs[i + 1].beta;
        const bool is_max = b1 > b0 && b1 >= b2;
        const bool is_min = b1 < b0 && b1 <= b2;
        if (!is_max && !is_min) {
            continue;
        }
        // Vertex of the parabola through the three points (uniform spacing assumed locally).
        const double h = 0.5 * (flux_phi0[i + 1] - flux_phi0[i - 1]);
        const double curv = b0 - 2.0 * b1 + b2;
        double shift = 0.0;
        double value = b1;
        if (curv != 0.0) {
            shift = 0.5 * (b0 - b2) / curv;
            value = b1 - 0.25 * (b0 - b2) * shift;
        }
        out.push_back({flux_phi0[i] + shift * h, value});
    }
    return out;
}

}  // namespace twpa::snail
