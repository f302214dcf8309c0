#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "twpa/transient.hpp"

namespace twpa::circuit {

/// Reported floor for empty bins; 10*log10 of zero power is not representable in CSV.
inline constexpr double kPowerFloorWatts = 1e-50;

struct Spectrum {
    std::vector<double> bin_frequencies;  // [Hz], one-sided, k / window
    std::vector<double> power_w;          // power per bin into z0 [W]
    std::vector<double> psd_dbm;          // same in dBm
    double resolution = 0.0;              // [Hz]

    [[nodiscard]] std::size_t bin_of(double frequency) const;
    [[nodiscard]] double dbm_at(double frequency) const { return psd_dbm[bin_of(frequency)]; }
    [[nodiscard]] double power_at(double frequency) const { return power_w[bin_of(frequency)]; }
    [[nodiscard]] double total_power() const;
};

[[nodiscard]] double watts_to_dbm(double watts);

/// One-sided per-bin power of a real voltage record across `z0`, so that the
/// bins sum to mean(v^2)/z0. Rectangular window, no leakage correction.
[[nodiscard]] Spectrum power_spectrum(std::span<const double> samples, double dt, double z0);

/// Spectrum of the post-settle window of `trace`. Throws WindowTooShort.
[[nodiscard]] Spectrum extract_spectrum(const TimeTrace& trace, const DriveSpec& drive);

/// Same window of the input-port record.
[[nodiscard]] Spectrum extract_input_spectrum(const TimeTrace& trace, const DriveSpec& drive);

}  // namespace twpa::circuit
