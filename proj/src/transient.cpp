#include "twpa/transient.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "twpa/constants.hpp"
#include "twpa/errors.hpp"

namespace twpa::circuit {

double DriveSpec::highest_frequency() const {
    double f = 0.0;
    for (const auto& tone : tones) {
        f = std::max(f, tone.frequency);
    }
    return f;
}

DriveSpec DriveSpec::resolved() const {
    DriveSpec out = *this;
    const double f_max = highest_frequency();
    for (const auto& tone : tones) {
        if (!(tone.frequency > 0.0) || !std::isfinite(tone.peak_current)) {
            throw InvalidDrive("tone frequencies must be positive and amplitudes finite");
        }
    }
    if (!(window > 0.0) || !(settle_time >= 0.0) || !(ramp_time >= 0.0)) {
        throw InvalidDrive("window must be positive, settle and ramp times non-negative");
    }
    if (samples_per_period < 64) {
        throw InvalidDrive("samples_per_period must be >= 64");
    }
    if (f_max == 0.0 && dt == 0.0) {
        throw InvalidDrive("a drive without tones needs an explicit dt");
    }

    if (lock_window_to_pump && f_max > 0.0) {
        const double periods = std::max(1.0, std::round(window * f_max));
        out.window = periods / f_max;
    }
    if (out.dt == 0.0) {
        out.dt = 1.0 / (samples_per_period * f_max);
    }
    if (f_max > 0.0 && out.dt > 1.0 / (64.0 * f_max) * (1.0 + 1e-12)) {
        throw InvalidDrive("dt exceeds (pump period)/64");
    }

    const double window_steps = std::round(out.window / out.dt);
    const double settle_steps = std::round(out.settle_time / out.dt);
    if (window_steps < 2.0) {
        throw InvalidDrive("window shorter than two samples");
    }
    out.window = window_steps * out.dt;
    out.settle_time = settle_steps * out.dt;
    if (duration == 0.0) {
        out.duration = out.settle_time + out.window;
    } else {
        out.duration = std::round(duration / out.dt) * out.dt;
        if (out.window > out.duration - out.settle_time + 0.5 * out.dt) {
            throw WindowTooShort("window exceeds duration - settle_time");
        }
    }

    for (auto& tone : out.tones) {
        const double bin = std::max(1.0, std::round(tone.frequency * out.window));
        tone.frequency = bin / out.window;
    }
    return out;
}

std::size_t DriveSpec::settle_steps() const {
    return static_cast<std::size_t>(std::llround(settle_time / dt));
}

std::size_t DriveSpec::window_steps() const {
    return static_cast<std::size_t>(std::llround(window / dt));
}

std::size_t DriveSpec::total_steps() const {
    return static_cast<std::size_t>(std::llround(duration / dt));
}

double DriveSpec::source_current(double t) const {
    double i = 0.0;
    for (const auto& tone : tones) {
        i += tone.peak_current * std::sin(constants::two_pi * tone.frequency * t + tone.phase);
    }
    if (t < ramp_time) {
        i *= 0.5 * (1.0 - std::cos(std::numbers::pi * t / ramp_time));
    }
    return i;
}

namespace {

// Per-branch constants of the SNAIL current around its working point:
// I(delta) = Ic [ r sin(A + delta) + sin(B + delta/3) ] - offset.
struct BranchModel {
    double i_c;
    double r;
    double sin_a, cos_a;
    double sin_b, cos_b;
    double offset;
};

class LadderSolver {
public:
    LadderSolver(const Chain& chain, const DriveSpec& drive, const TransientOptions& options)
        : drive_(drive), options_(options), dt_(drive.dt) {
        const auto& cfg = chain.config;
        n_nodes_ = chain.cells.size() + 1;
        const std::size_t nb = chain.cells.size();

        branches_.reserve(nb);
        for (const auto& cell : chain.cells) {
            BranchModel m{};
            m.i_c = cell.snail.i_c;
            m.r = cell.snail.r;
            const double a = cell.phi_star;
            const double b = (cell.phi_star - cell.snail.phi_ext) / 3.0;
            m.sin_a = std::sin(a);
            m.cos_a = std::cos(a);
            m.sin_b = std::sin(b);
            m.cos_b = std::cos(b);
            // Remove the O(1e-12 Ic) root residual so that rest is an exact fixed point.
            m.offset = m.i_c * (m.r * m.sin_a + m.sin_b);
            branches_.push_back(m);
        }

        g_port_ = 1.0 / cfg.z0;
        g_cj_ = 2.0 * cfg.c_j / dt_;
        const double g_cg = 2.0 * cfg.c_g / dt_;
        shunt_g_.resize(nb);
        shunt_r_.resize(nb);
        shunt_gc_ = g_cg;
        for (std::size_t b = 0; b < nb; ++b) {
            shunt_r_[b] = chain.cells[b].esr;
            shunt_g_[b] = g_cg / (1.0 + shunt_r_[b] * g_cg);
        }

        v_.assign(n_nodes_, 0.0);
        v_prev_.assign(n_nodes_, 0.0);
        v_new_.assign(n_nodes_, 0.0);
        flux_.assign(n_nodes_, 0.0);
        flux_new_.assign(n_nodes_, 0.0);
        i_cj_.assign(nb, 0.0);
        u_cj_.assign(nb, 0.0);
        i_sh_.assign(nb, 0.0);
        v_c_.assign(nb, 0.0);
        branch_current_.assign(nb, 0.0);
        branch_y_.assign(nb, 0.0);
        residual_.assign(n_nodes_, 0.0);
        diag_.assign(n_nodes_, 0.0);
        off_.assign(n_nodes_, 0.0);
        scratch_c_.assign(n_nodes_, 0.0);
        scratch_d_.assign(n_nodes_, 0.0);
    }

    TimeTrace run() {
        const std::size_t steps = drive_.total_steps();
        TimeTrace trace;
        trace.dt = dt_;
        trace.samples.resize(steps);
        trace.input_samples.resize(steps);

        for (std::size_t n = 0; n < steps; ++n) {
            const double t = static_cast<double>(n + 1) * dt_;
            const std::size_t iterations = step(n, drive_.source_current(t));
            trace.stats.newton_iterations += iterations;
            trace.stats.max_iterations_per_step =
                std::max(trace.stats.max_iterations_per_step, iterations);
            trace.samples[n] = v_.back();
            trace.input_samples[n] = v_.front();
        }
        trace.stats.steps = steps;
        return trace;
    }

private:
    std::size_t step(std::size_t n, double i_src) {
        const std::size_t nb = branches_.size();
        const double half_dt = 0.5 * dt_;
        const double inv_flux = 1.0 / constants::reduced_flux_quantum;

        // Linear extrapolation as Newton predictor.
        for (std::size_t k = 0; k < n_nodes_; ++k) {
            v_new_[k] = n > 0 ? 2.0 * v_[k] - v_prev_[k] : v_[k];
        }

        for (int it = 1; it <= options_.max_newton_iterations; ++it) {
            for (std::size_t k = 0; k < n_nodes_; ++k) {
                flux_new_[k] = flux_[k] + half_dt * (v_[k] + v_new_[k]);
            }
            for (std::size_t b = 0; b < nb; ++b) {
                const BranchModel& m = branches_[b];
                const double delta = (flux_new_[b] - flux_new_[b + 1]) * inv_flux;
                const double s = std::sin(delta / 3.0);
                const double c = std::cos(delta / 3.0);
                const double sin_d = s * (3.0 - 4.0 * s * s);
                const double cos_d = c * (4.0 * c * c - 3.0);
                const double sin_ad = m.sin_a * cos_d + m.cos_a * sin_d;
                const double cos_ad = m.cos_a * cos_d - m.sin_a * sin_d;
                const double sin_bd = m.sin_b * c + m.cos_b * s;
                const double cos_bd = m.cos_b * c - m.sin_b * s;
                const double i_jj = m.i_c * (m.r * sin_ad + sin_bd) - m.offset;
                const double di = m.i_c * (m.r * cos_ad + cos_bd / 3.0);

                const double u = v_new_[b] - v_new_[b + 1];
                const double i_cap = g_cj_ * (u - u_cj_[b]) - i_cj_[b];
                branch_current_[b] = i_jj + i_cap;
                branch_y_[b] = di * inv_flux * half_dt + g_cj_;
            }

            // KCL: currents leaving each node.
            double max_v = 0.0;
            for (std::size_t k = 0; k < n_nodes_; ++k) {
                double f = 0.0;
                double d = 0.0;
                if (k > 0) {
                    const std::size_t b = k - 1;
                    f -= branch_current_[b];
                    d += branch_y_[b];
                    f += shunt_g_[b] * (v_new_[k] - v_c_[b]) -
                         i_sh_[b] / (1.0 + shunt_r_[b] * shunt_gc_);
                    d += shunt_g_[b];
                }
                if (k + 1 < n_nodes_) {
                    f += branch_current_[k];
                    d += branch_y_[k];
                    off_[k] = -branch_y_[k];
                }
                if (k == 0 || k + 1 == n_nodes_) {
                    f += g_port_ * v_new_[k];
                    d += g_port_;
                }
                if (k == 0) {
                    f -= i_src;
                }
                residual_[k] = -f;
                diag_[k] = d;
                max_v = std::max(max_v, std::abs(v_new_[k]));
            }

            solve_tridiagonal();

            double max_dv = 0.0;
            for (std::size_t k = 0; k < n_nodes_; ++k) {
                v_new_[k] += residual_[k];
                max_dv = std::max(max_dv, std::abs(residual_[k]));
            }
            if (!std::isfinite(max_dv)) {
                throw NewtonDivergence(n, "non-finite Newton update");
            }
            if (max_dv <= options_.voltage_reltol * max_v + options_.voltage_abstol) {
                commit(half_dt, inv_flux);
                return static_cast<std::size_t>(it);
            }
        }
        throw NewtonDivergence(n, "no convergence in " +
                                      std::to_string(options_.max_newton_iterations) +
                                      " iterations (dt too large or drive beyond validity)");
    }

    void commit(double half_dt, double /*inv_flux*/) {
        const std::size_t nb = branches_.size();
        for (std::size_t k = 0; k < n_nodes_; ++k) {
            flux_[k] += half_dt * (v_[k] + v_new_[k]);
        }
        for (std::size_t b = 0; b < nb; ++b) {
            const double u = v_new_[b] - v_new_[b + 1];
            i_cj_[b] = g_cj_ * (u - u_cj_[b]) - i_cj_[b];
            u_cj_[b] = u;
            const double v_node = v_new_[b + 1];
            const double i_new = (shunt_gc_ * (v_node - v_c_[b]) - i_sh_[b]) /
                                 (1.0 + shunt_r_[b] * shunt_gc_);
            i_sh_[b] = i_new;
            v_c_[b] = v_node - shunt_r_[b] * i_new;
        }
        v_prev_.swap(v_);
        v_.swap(v_new_);
    }

    // Solves the symmetric tridiagonal system (diag_, off_) x = residual_ in place.
    void solve_tridiagonal() {
        const std::size_t n = n_nodes_;
        scratch_c_[0] = off_[0] / diag_[0];
        scratch_d_[0] = residual_[0] / diag_[0];
        for (std::size_t k = 1; k < n; ++k) {
            const double denom = diag_[k] - off_[k - 1] * scratch_c_[k - 1];
            scratch_c_[k] = k + 1 < n ? off_[k] / denom : 0.0;
            scratch_d_[k] = (residual_[k] - off_[k - 1] * scratch_d_[k - 1]) / denom;
        }
        residual_[n - 1] = scratch_d_[n - 1];
        for (std::size_t k = n - 1; k-- > 0;) {
            residual_[k] = scratch_d_[k] - scratch_c_[k] * residual_[k + 1];
        }
    }

    const DriveSpec& drive_;
    TransientOptions options_;
    double dt_;
    std::size_t n_nodes_ = 0;
    std::vector<BranchModel> branches_;
    double g_port_ = 0.0;
    double g_cj_ = 0.0;
    double shunt_gc_ = 0.0;
    std::vector<double> shunt_g_, shunt_r_;

    std::vector<double> v_, v_prev_, v_new_, flux_, flux_new_;
    std::vector<double> i_cj_, u_cj_, i_sh_, v_c_;
    std::vector<double> branch_current_, branch_y_;
    std::vector<double> residual_, diag_, off_, scratch_c_, scratch_d_;
};

}  // namespace

TimeTrace simulate_transient(const Chain& chain, const DriveSpec& drive,
                             const TransientOptions& options) {
    if (chain.cells.size() < 2) {
        throw InvalidChain("chain has fewer than two cells");
    }
    const DriveSpec resolved = drive.resolved();
    if (!resolved.tones.empty() &&
        resolved.dt > 1.0 / (64.0 * resolved.highest_frequency()) * (1.0 + 1e-12)) {
        throw InvalidDrive("dt exceeds (pump period)/64");
    }
    LadderSolver solver(chain, resolved, options);
    TimeTrace trace = solver.run();
    trace.chain_config = chain.config;
    trace.flux_phi0 = chain.flux_phi0;
    trace.drive = resolved;
    return trace;
}

}  // namespace twpa::circuit
