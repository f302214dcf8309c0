#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twpa/chain.hpp"
#include "twpa/transient.hpp"

namespace twpa::config {

enum class Profile { Ci, Full };

[[nodiscard]] Profile profile_from_string(const std::string& s);
[[nodiscard]] std::string to_string(Profile p);

/// Evenly spaced grid, or explicit values when `values` is non-empty.
struct Grid {
    double start = 0.0;
    double stop = 0.0;
    int points = 0;
    std::vector<double> values;

    [[nodiscard]] std::vector<double> resolve() const;
};

/// Tone levels and timing shared by the transient commands. The timing
/// fields map one to one onto DriveSpec.
struct DriveConfig {
    double pump_frequency = 7.705e9;  // [Hz]
    double pump_current = 0.157e-6;   // [A] peak
    double signal_current = 0.0011e-6;
    double detuning = 31e6;           // [Hz], signal offset below f_p/2 (3WM) or f_p (4WM)
    double duration = 0.0;
    double settle_time = 60e-9;
    double window = 60e-9;
    double dt = 0.0;
    double ramp_time = 5e-9;
    int samples_per_period = 128;

    [[nodiscard]] circuit::DriveSpec base() const;
};

struct CoeffsConfig {
    Grid flux{-2.0, 2.0, 401, {}};  // [Phi0]
    double r = 0.07;
    double i_c = 2.19e-6;
};

struct FluxSweepConfig {
    Grid flux{0.3, 0.7, 9, {}};
    std::vector<double> marks{0.59, 0.45};
};

struct GainPhaseConfig {
    double flux = 0.59;
    std::optional<double> pump_current;  // defaults to drive.pump_current
    Grid phase{0.0, 6.283185307179586, 17, {}};
};

/// Synthetic single-mode squeezing experiment. The device output is a
/// squeezed vacuum whose axis follows half the pump phase; the readout chain
/// adds `added_photons` of thermal noise to both pump states and is
/// normalized with the exact factor, so only sampling noise and the optional
/// gain drift remain.
struct SmsConfig {
    double squeeze_db = 3.0103;   // magnitude below vacuum
    double antisqueeze_db = 0.0;  // 0 means pure state (+squeeze_db)
    double added_photons = 0.5;
    double gain_drift = 0.0;      // fractional gain change of the ON sequence
    double gain_uncertainty_db = 1.0;
    std::int64_t n_rep = 1'000'000;
    Grid phase{0.0, 6.283185307179586, 9, {}};
    std::string input;            // quadrature CSV; replaces the synthetic source
};

struct TmsConfig {
    Grid r{0.0, 1.0, 11, {}};
    double thermal_photons = 0.0;
    double added_photons = 0.5;
    double gain_drift = 0.0;
    double gain_uncertainty_db = 1.0;
    std::int64_t n_rep = 1'000'000;
    std::string input;
};

struct SntjFitConfig {
    std::string input;  // CSV with v_bias,psd[,frequency]; empty: synthetic Table-style data
    double frequency = 7.705e9 / 2.0;
    double bandwidth = 1e6;
    double guess_g_sys_db = 60.0;
    double guess_t_sys = 3.0;
    double guess_t_electron = 0.1;
    // Synthetic source.
    // Offsets from f_p/2 [Hz]; the last row sits 31 MHz above f_p.
    std::vector<double> synthetic_offsets{0.0, 31e6, -31e6, 61e6, -61e6, 7.705e9 / 2.0 + 31e6};
    std::vector<double> synthetic_gains_db{61.7, 62.0, 61.1, 61.5, 62.0, 46.5};
    double synthetic_t_sys = 4.0;
    double synthetic_t_electron = 0.05;
    double synthetic_noise = 0.01;  // relative
    double synthetic_v_max = 400e-6;  // [V]
    int synthetic_points = 100001;
};

struct NormalizeConfig {
    std::optional<double> eta;  // linear; computed from the chain loss when absent
    double flux = 0.59;         // [Phi0], bias used for the loss estimate
    double g_sys_db = 61.7;
    double f_acq = 7.705e9 / 2.0;
    double t_int = 10e-6;
    double epsilon = 0.98;
    double loss_correction_db = 1.0;
    double chain_fraction = 1.0;
};

struct AttenuationConfig {
    double s21_off_db = 0.0;
    std::optional<double> eta_db;  // computed from the chain loss when absent
    double g_sys_db = 61.7;
    double flux = 0.59;
    double frequency = 7.705e9 / 2.0;
};

struct RunConfig {
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";
    unsigned threads = 0;
    Profile profile = Profile::Ci;
    circuit::ChainConfig chain;
    bool chain_seed_set = false;  // chain.rng_seed given explicitly
    DriveConfig drive;
    CoeffsConfig coeffs;
    FluxSweepConfig flux_sweep;
    GainPhaseConfig gain_phase;
    SmsConfig sms;
    TmsConfig tms;
    SntjFitConfig sntj_fit;
    NormalizeConfig normalize;
    AttenuationConfig attenuation;

    /// Seed of the chain disorder: chain.rng_seed if set, else master_seed.
    [[nodiscard]] std::uint64_t chain_seed() const;
    [[nodiscard]] circuit::ChainConfig resolved_chain() const;
};

/// Profile defaults: ci runs a 100-cell line and smaller grids, full the
/// 700-cell device.
[[nodiscard]] RunConfig defaults(Profile profile);

/// Overlay a JSON document on the profile defaults. Unknown keys and
/// mistyped values throw ConfigError naming the offending path.
[[nodiscard]] RunConfig parse(const nlohmann::json& doc, Profile profile);
[[nodiscard]] RunConfig load(const std::string& path, Profile profile);

/// Fully resolved configuration, the form recorded next to each result.
/// output_dir and threads are left out: they do not change any result.
[[nodiscard]] nlohmann::json to_json(const RunConfig& cfg);

/// FNV-1a 64 of the compact dump of to_json(cfg), as 16 hex digits.
[[nodiscard]] std::string config_hash(const RunConfig& cfg);

/// Independent stream seed for sweep point `index`.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace twpa::config
