#include "twpa/sweeps.hpp"

#include <atomic>
#include <cmath>
#include <numeric>

#include "twpa/errors.hpp"

namespace twpa::circuit {

namespace {
struct ProgressCounter {
    const SweepOptions& options;
    std::size_t total;
    std::atomic<std::size_t> done{0};

    void tick() {
        const std::size_t d = ++done;
        if (options.progress) {
            options.progress(d, total);
        }
    }
};

double bin_dbm(const Spectrum& s, double f) { return s.dbm_at(f); }
}  // namespace

DriveSpec three_wave_drive(double f_pump, double pump_current, double signal_current,
                           double detuning, const DriveSpec& base) {
    DriveSpec d = base;
    d.tones = {Tone{f_pump, pump_current, 0.0}, Tone{f_pump / 2.0 - detuning, signal_current, 0.0}};
    return d;
}

DriveSpec four_wave_drive(double f_pump, double pump_current, double signal_current,
                          double detuning, const DriveSpec& base) {
    DriveSpec d = base;
    d.tones = {Tone{f_pump, pump_current, 0.0}, Tone{f_pump - detuning, signal_current, 0.0}};
    return d;
}

std::vector<IdlerRow> flux_sweep_idler(const ChainConfig& config, const DriveSpec& drive3wm,
                                       const DriveSpec& drive4wm,
                                       std::span<const double> flux_grid,
                                       const SweepOptions& options) {
    config.validate();
    const DriveSpec d3 = drive3wm.resolved();
    const DriveSpec d4 = drive4wm.resolved();
    if (d3.tones.size() != 2 || d4.tones.size() != 2) {
        throw InvalidDrive("mixing drives need exactly a pump and a signal tone");
    }
    const double f3_idler = d3.tones[0].frequency - d3.tones[1].frequency;
    const double f4_idler = 2.0 * d4.tones[0].frequency - d4.tones[1].frequency;
    if (!(f3_idler > 0.0)) {
        throw InvalidDrive("3WM idler frequency f_p - f_s must be positive");
    }

    // Two jobs per flux point, 3WM first.
    const std::size_t n = flux_grid.size();
    ProgressCounter progress{options, 2 * n};
    auto job = [&](std::size_t j) -> std::pair<double, double> {
        const double flux = flux_grid[j / 2];
        const bool three_wave = j % 2 == 0;
        const DriveSpec& d = three_wave ? d3 : d4;
        const Chain chain = build_chain(config, flux, d.tones[0].frequency);
        const TimeTrace trace = simulate_transient(chain, d, options.transient);
        const Spectrum s = extract_spectrum(trace, d);
        progress.tick();
        return {bin_dbm(s, three_wave ? f3_idler : f4_idler), bin_dbm(s, d.tones[1].frequency)};
    };
    const auto results = parallel_map<std::pair<double, double>>(2 * n, options.threads, job);

    std::vector<IdlerRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].flux_phi0 = flux_grid[i];
        rows[i].psd_3wm_idler_dbm = results[2 * i].first;
        rows[i].psd_3wm_signal_dbm = results[2 * i].second;
        rows[i].psd_4wm_idler_dbm = results[2 * i + 1].first;
        rows[i].psd_4wm_signal_dbm = results[2 * i + 1].second;
    }
    return rows;
}

std::vector<GainRow> degenerate_gain_vs_phase(const ChainConfig& config, double flux_phi0,
                                              const Tone& pump, const Tone& signal,
                                              std::span<const double> phase_grid,
                                              const DriveSpec& base, const SweepOptions& options) {
    config.validate();
    DriveSpec on = base;
    on.tones = {pump, signal};
    on = on.resolved();
    const double resolution = on.resolution();
    const auto pump_bin = std::llround(on.tones[0].frequency / resolution);
    const auto signal_bin = std::llround(on.tones[1].frequency / resolution);
    if (2 * signal_bin != pump_bin) {
        throw InvalidDrive("degenerate gain needs the signal exactly at f_p/2 on the bin grid");
    }
    const double f_signal = on.tones[1].frequency;
    const Chain chain = build_chain(config, flux_phi0, on.tones[0].frequency);

    // Job 0 is the pump-off reference; the pump tone stays in the list with
    // zero amplitude so that the sample grid is identical.
    const std::size_t n = phase_grid.size();
    ProgressCounter progress{options, n + 1};
    auto job = [&](std::size_t j) -> double {
        DriveSpec d = on;
        if (j == 0) {
            d.tones[0].peak_current = 0.0;
        } else {
            d.tones[0].phase = phase_grid[j - 1];
        }
        const TimeTrace trace = simulate_transient(chain, d, options.transient);
        const double p = extract_spectrum(trace, d).power_at(f_signal);
        progress.tick();
        return p;
    };
    const auto power = parallel_map<double>(n + 1, options.threads, job);

    std::vector<GainRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].pump_phase = phase_grid[i];
        rows[i].gain_db = 10.0 * std::log10(power[i + 1] / power[0]);
    }
    return rows;
}

PowerBalance power_balance(const TimeTrace& trace) {
    const DriveSpec& d = trace.drive;
    const double z0 = trace.chain_config.z0;
    PowerBalance pb;
    for (const auto& tone : d.tones) {
        pb.available_w += tone.peak_current * tone.peak_current * z0 / 8.0;
    }
    const std::size_t start = d.settle_steps();
    const std::size_t count = d.window_steps();
    if (trace.samples.size() < start + count) {
        throw WindowTooShort("trace shorter than settle + window");
    }
    for (std::size_t n = start; n < start + count; ++n) {
        const double t = static_cast<double>(n + 1) * trace.dt;
        const double v_in = trace.input_samples[n];
        const double v_out = trace.samples[n];
        pb.delivered_w += v_in * (d.source_current(t) - v_in / z0);
        pb.output_w += v_out * v_out / z0;
    }
    pb.delivered_w /= static_cast<double>(count);
    pb.output_w /= static_cast<double>(count);
    return pb;
}

double transmission_db(const ChainConfig& config, double flux_phi0, const Tone& tone,
                       const DriveSpec& base, const TransientOptions& options) {
    DriveSpec d = base;
    d.tones = {tone};
    d = d.resolved();
    const Chain chain = build_chain(config, flux_phi0, d.tones[0].frequency);
    const TimeTrace trace = simulate_transient(chain, d, options);
    const double p_out = extract_spectrum(trace, d).power_at(d.tones[0].frequency);
    const double available = tone.peak_current * tone.peak_current * config.z0 / 8.0;
    return 10.0 * std::log10(p_out / available);
}

}  // namespace twpa::circuit
