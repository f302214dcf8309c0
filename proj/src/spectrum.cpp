#include "twpa/spectrum.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numeric>

#include "twpa/errors.hpp"

namespace twpa::circuit {

namespace {
// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

std::span<const double> window_of(const std::vector<double>& record, const DriveSpec& drive) {
    const DriveSpec d = drive.resolved();
    const std::size_t start = d.settle_steps();
    const std::size_t count = d.window_steps();
    if (record.size() < start + count) {
        throw WindowTooShort("trace has " + std::to_string(record.size()) +
                             " samples, settle + window needs " + std::to_string(start + count));
    }
    return std::span<const double>(record).subspan(start, count);
}
}  // namespace

double watts_to_dbm(double watts) {
    return 10.0 * std::log10(std::max(watts, kPowerFloorWatts) / 1e-3);
}

std::size_t Spectrum::bin_of(double frequency) const {
    const double k = std::round(frequency / resolution);
    if (k < 0.0 || k >= static_cast<double>(power_w.size())) {
        throw std::out_of_range("frequency outside the spectrum");
    }
    return static_cast<std::size_t>(k);
}

double Spectrum::total_power() const {
    return std::accumulate(power_w.begin(), power_w.end(), 0.0);
}

Spectrum power_spectrum(std::span<const double> samples, double dt, double z0) {
    const std::size_t n = samples.size();
    const std::size_t bins = n / 2 + 1;
    std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    std::unique_ptr<fftw_complex, FftwFree> out(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));

    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
    }
    std::copy(samples.begin(), samples.end(), in.get());
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }

    Spectrum s;
    const double nd = static_cast<double>(n);
    s.resolution = 1.0 / (nd * dt);
    s.bin_frequencies.resize(bins);
    s.power_w.resize(bins);
    s.psd_dbm.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        const double re = out.get()[k][0];
        const double im = out.get()[k][1];
        const double mag2 = (re * re + im * im) / (nd * nd);
        // Interior bins collect the negative-frequency mirror as well.
        const bool edge = k == 0 || (n % 2 == 0 && k == bins - 1);
        s.bin_frequencies[k] = static_cast<double>(k) * s.resolution;
        s.power_w[k] = (edge ? 1.0 : 2.0) * mag2 / z0;
        s.psd_dbm[k] = watts_to_dbm(s.power_w[k]);
    }
    return s;
}

Spectrum extract_spectrum(const TimeTrace& trace, const DriveSpec& drive) {
    return power_spectrum(window_of(trace.samples, drive), trace.dt, trace.chain_config.z0);
}

Spectrum extract_input_spectrum(const TimeTrace& trace, const DriveSpec& drive) {
    return power_spectrum(window_of(trace.input_samples, drive), trace.dt,
                          trace.chain_config.z0);
}

}  // namespace twpa::circuit
