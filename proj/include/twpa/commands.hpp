#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twpa/config.hpp"
#include "twpa/gaussian.hpp"

namespace twpa::cli {

constexpr int kSchemaVersion = 1;

/// Result of one command. Exactly one of csv / json is the primary output
/// (result.csv or result.json); meta is merged into meta.json.
struct Output {
    std::string csv;
    nlohmann::json json;
    nlohmann::json meta = nlohmann::json::object();

    [[nodiscard]] bool is_csv() const { return !csv.empty(); }
    /// Bytes of the primary output file.
    [[nodiscard]] std::string primary() const;
};

using Progress = std::function<void(const std::string& stage, std::size_t done, std::size_t total)>;

[[nodiscard]] const std::vector<std::string>& command_names();

/// Throws ConfigError for an unknown command name.
[[nodiscard]] Output run_command(const std::string& name, const config::RunConfig& cfg,
                                 const Progress& progress = {});

/// Writes result.csv|result.json and meta.json into cfg.output_dir.
void write_output(const std::string& name, const config::RunConfig& cfg, const Output& out);

[[nodiscard]] std::string git_revision();

[[nodiscard]] Output cmd_coeffs(const config::RunConfig& cfg);
[[nodiscard]] Output cmd_flux_sweep(const config::RunConfig& cfg, const Progress& progress = {});
[[nodiscard]] Output cmd_gain_phase(const config::RunConfig& cfg, const Progress& progress = {});
[[nodiscard]] Output cmd_sms(const config::RunConfig& cfg, const Progress& progress = {});
[[nodiscard]] Output cmd_tms(const config::RunConfig& cfg, const Progress& progress = {});
[[nodiscard]] Output cmd_sntj_fit(const config::RunConfig& cfg);
[[nodiscard]] Output cmd_normalize(const config::RunConfig& cfg);
[[nodiscard]] Output cmd_attenuation(const config::RunConfig& cfg);

/// One synthetic single-mode measurement: the ON sequence sees `state` plus
/// the added noise (scaled by 1 + gain_drift), the OFF sequence vacuum plus
/// the same noise. Both are taken through raw digitizer units and back with
/// `upsilon` before estimation.
struct PipelineResult {
    gaussian::CovMatrix sigma_on;
    gaussian::CovMatrix sigma_off;
    gaussian::CovMatrix sigma;  // background subtracted
};

[[nodiscard]] PipelineResult synthetic_pipeline(const gaussian::CovMatrix& state,
                                                double added_photons, double gain_drift,
                                                double gain_uncertainty_db, std::int64_t n_rep,
                                                std::uint64_t seed_on, std::uint64_t seed_off,
                                                double upsilon);

}  // namespace twpa::cli
