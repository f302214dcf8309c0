#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "twpa/spectrum.hpp"
#include "twpa/transient.hpp"

namespace twpa::circuit {

struct SweepOptions {
    unsigned threads = 0;  // 0: hardware concurrency
    TransientOptions transient{};
    /// Called from worker threads after each finished point (done, total).
    std::function<void(std::size_t, std::size_t)> progress;
};

/// Runs fn(i) for i in [0, n) on a small thread pool; results keep index order.
template <typename T>
std::vector<T> parallel_map(std::size_t n, unsigned threads, const std::function<T(std::size_t)>& fn);

/// Pump at f_p plus signal at f_p/2 - detuning. tones[0] is the pump.
[[nodiscard]] DriveSpec three_wave_drive(double f_pump, double pump_current, double signal_current,
                                         double detuning, const DriveSpec& base = {});

/// Pump at f_p plus signal at f_p - detuning. tones[0] is the pump.
[[nodiscard]] DriveSpec four_wave_drive(double f_pump, double pump_current, double signal_current,
                                        double detuning, const DriveSpec& base = {});

struct IdlerRow {
    double flux_phi0 = 0.0;
    double psd_3wm_idler_dbm = 0.0;  // at f_p - f_s
    double psd_4wm_idler_dbm = 0.0;  // at 2 f_p - f_s
    double psd_3wm_signal_dbm = 0.0;
    double psd_4wm_signal_dbm = 0.0;
};

/// Idler power at the output port versus flux for the two mixing
/// configurations. Both drives carry the pump in tones[0] and the signal in
/// tones[1]. The disorder realization is the one of config.rng_seed at every
/// flux point; the ESR reference is each drive's pump frequency.
[[nodiscard]] std::vector<IdlerRow> flux_sweep_idler(const ChainConfig& config,
                                                     const DriveSpec& drive3wm,
                                                     const DriveSpec& drive4wm,
                                                     std::span<const double> flux_grid,
                                                     const SweepOptions& options = {});

struct GainRow {
    double pump_phase = 0.0;  // [rad]
    double gain_db = 0.0;
};

/// Phase-sensitive gain at f_s = f_p/2: signal-bin power with the pump on at
/// each pump phase minus the same bin with the pump off.
[[nodiscard]] std::vector<GainRow> degenerate_gain_vs_phase(const ChainConfig& config,
                                                            double flux_phi0, const Tone& pump,
                                                            const Tone& signal,
                                                            std::span<const double> phase_grid,
                                                            const DriveSpec& base = {},
                                                            const SweepOptions& options = {});

/// Power balance of one run over the analysis window.
struct PowerBalance {
    double available_w = 0.0;  // sum over tones of I^2 z0 / 8
    double delivered_w = 0.0;  // mean(V_in (I_src - V_in/z0))
    double output_w = 0.0;     // mean(V_out^2 / z0)
    [[nodiscard]] double reflected_w() const { return available_w - delivered_w; }
};

[[nodiscard]] PowerBalance power_balance(const TimeTrace& trace);

/// Output power over available source power at one on-grid tone, in dB.
[[nodiscard]] double transmission_db(const ChainConfig& config, double flux_phi0, const Tone& tone,
                                     const DriveSpec& base = {},
                                     const TransientOptions& options = {});

}  // namespace twpa::circuit

#include "twpa/detail/parallel_map.hpp"
