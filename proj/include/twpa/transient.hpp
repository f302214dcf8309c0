#pragma once

#include <cstddef>
#include <vector>

#include "twpa/chain.hpp"

namespace twpa::circuit {

struct Tone {
    double frequency = 0.0;     // [Hz]
    double peak_current = 0.0;  // [A], Norton source at the input port
    double phase = 0.0;         // [rad]
};

/// Source waveform and timing of one transient run.
///
/// resolved() fixes the integer sample grid: dt defaults to the period of
/// the highest-frequency tone / 128, the window becomes an integer number of
/// samples, and every tone is moved to the nearest multiple of 1/window so
/// that the rectangular-window FFT is leakage-free. With lock_window_to_pump
/// the window is first shortened/lengthened to an integer number of periods
/// of the highest-frequency tone, which keeps that tone exactly where it was.
struct DriveSpec {
    std::vector<Tone> tones;
    double duration = 0.0;       // [s]; 0 means settle_time + window
    double settle_time = 10e-9;  // [s]
    double window = 60e-9;       // [s]
    double dt = 0.0;             // [s]; 0 means auto
    double ramp_time = 2e-9;     // [s], raised-cosine turn-on of all tones
    int samples_per_period = 128;
    bool lock_window_to_pump = true;

    [[nodiscard]] DriveSpec resolved() const;

    [[nodiscard]] double highest_frequency() const;
    [[nodiscard]] std::size_t settle_steps() const;
    [[nodiscard]] std::size_t window_steps() const;
    [[nodiscard]] std::size_t total_steps() const;
    [[nodiscard]] double resolution() const { return 1.0 / window; }

    /// Source current at time t.
    [[nodiscard]] double source_current(double t) const;
};

struct SolverStats {
    std::size_t steps = 0;
    std::size_t newton_iterations = 0;
    std::size_t max_iterations_per_step = 0;
};

struct TimeTrace {
    double dt = 0.0;
    std::vector<double> samples;        // output-port voltage at t = dt, 2 dt, ... [V]
    std::vector<double> input_samples;  // input-port voltage on the same grid [V]
    ChainConfig chain_config;
    double flux_phi0 = 0.0;
    DriveSpec drive;                    // resolved
    SolverStats stats;

    [[nodiscard]] double duration() const { return dt * static_cast<double>(samples.size()); }
};

struct TransientOptions {
    int max_newton_iterations = 50;
    double voltage_reltol = 1e-11;
    double voltage_abstol = 1e-21;  // [V]
};

/// Fixed-step trapezoidal integration of the ladder
///
///   in --[SNAIL || C_J]-- 1 --[SNAIL || C_J]-- 2 ... -- N -- z0
///    |                    |                   |
///  Isrc || z0          C_g+ESR             C_g+ESR
///
/// with node flux as the state, the exact SNAIL current relation around each
/// cell's own phi*, and a full Newton solve of the tridiagonal node system
/// at every step. Throws NewtonDivergence carrying the failing step index.
[[nodiscard]] TimeTrace simulate_transient(const Chain& chain, const DriveSpec& drive,
                                           const TransientOptions& options = {});

}  // namespace twpa::circuit
