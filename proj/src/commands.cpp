#include "twpa/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "twpa/calibration.hpp"
#include "twpa/constants.hpp"
#include "twpa/errors.hpp"
#include "twpa/gaussian_io.hpp"
#include "twpa/snail.hpp"
#include "twpa/sweeps.hpp"

#ifndef TWPA_GIT_REVISION
#define TWPA_GIT_REVISION "unknown"
#endif

namespace twpa::cli {

using nlohmann::json;
namespace gs = twpa::gaussian;

namespace {

std::string num(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

// Small CSV builder; the first line carries schema and config hash.
class Table {
public:
    Table(const std::string& command, const config::RunConfig& cfg, std::vector<std::string> columns)
        : ncols_(columns.size()) {
        out_ << "# twpa-" << command << " v" << kSchemaVersion << " config=" << config::config_hash(cfg)
             << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) {
            out_ << (i ? "," : "") << columns[i];
        }
        out_ << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != ncols_) {
            throw std::logic_error("CSV row width mismatch");
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out_ << (i ? "," : "") << cells[i];
        }
        out_ << "\n";
    }

    [[nodiscard]] std::string str() const { return out_.str(); }

private:
    std::size_t ncols_;
    std::ostringstream out_;
};

circuit::SweepOptions sweep_options(const config::RunConfig& cfg, const std::string& stage,
                                    const Progress& progress) {
    circuit::SweepOptions opt;
    opt.threads = cfg.threads;
    if (progress) {
        opt.progress = [progress, stage](std::size_t done, std::size_t total) {
            progress(stage, done, total);
        };
    }
    return opt;
}

calibration::LadderCell nominal_cell(const circuit::ChainConfig& chain, double flux_phi0) {
    const snail::SnailParams p{chain.r, chain.i_c_nominal, snail::reduced_flux(flux_phi0)};
    return {snail::coefficients(p).inductance, chain.c_j, chain.c_g};
}

double chain_eta(const config::RunConfig& cfg, double frequency, double flux_phi0, double fraction) {
    const auto chain = cfg.resolved_chain();
    return calibration::insertion_loss_from_tan_delta(chain.tan_delta, chain.n_cells, frequency,
                                                      nominal_cell(chain, flux_phi0), fraction);
}

calibration::NormalizationParams normalization_params(const config::RunConfig& cfg) {
    const auto& n = cfg.normalize;
    calibration::NormalizationParams p;
    p.eta = n.eta ? *n.eta : chain_eta(cfg, n.f_acq, n.flux, n.chain_fraction);
    p.g_sys = calibration::db_to_linear(n.g_sys_db);
    p.z0 = cfg.chain.z0;
    p.f_acq = n.f_acq;
    p.t_int = n.t_int;
    p.epsilon = n.epsilon;
    p.loss_correction_db = n.loss_correction_db;
    return p;
}

constexpr double kDbPerNeper = 10.0 / 2.302585092994046;

json null_or(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Squeezing of a subtracted 2x2 covariance with statistical and gain
// systematic bands. Unphysical results are reported, not clamped.
json squeezing_report(const gs::CovMatrix& on, const gs::CovMatrix& off, const gs::CovMatrix& sigma,
                      double gain_uncertainty_db) {
    json j;
    j["covariance"] = gs::to_json(sigma);
    j["physical"] = gs::is_physical(sigma);
    try {
        const gs::Squeezing s = gs::squeezing_db(sigma);
        j["s_x_db"] = s.s_x_db;
        j["s_p_db"] = s.s_p_db;
        j["s_min_db"] = std::min(s.s_x_db, s.s_p_db);
        j["s_x_stat_db"] = kDbPerNeper * sigma.uncertainty(0, 0) / sigma.entries(0, 0);
        j["s_p_stat_db"] = kDbPerNeper * sigma.uncertainty(1, 1) / sigma.entries(1, 1);
    } catch (const NonPositiveVariance& e) {
        j["s_x_db"] = nullptr;
        j["s_p_db"] = nullptr;
        j["s_min_db"] = nullptr;
        j["error"] = e.what();
    }
    // Assumed gain G +/- u: quadratures scale by 1/sqrt(G), so the subtracted
    // excess scales by 10^(-+u/10).
    json band = json::array();
    for (double sign : {+1.0, -1.0}) {
        const double scale = std::pow(10.0, -sign * gain_uncertainty_db / 10.0);
        const gs::CovMatrix alt = gs::subtract_background_scaled(on, off, scale);
        json b{{"gain_offset_db", sign * gain_uncertainty_db}};
        try {
            const gs::Squeezing s = gs::squeezing_db(alt);
            b["s_x_db"] = s.s_x_db;
            b["s_p_db"] = s.s_p_db;
        } catch (const NonPositiveVariance&) {
            b["s_x_db"] = nullptr;
            b["s_p_db"] = nullptr;
        }
        band.push_back(b);
    }
    j["gain_systematic"] = band;
    return j;
}

double negativity_or_nan(const gs::CovMatrix& sigma) {
    try {
        return gs::logarithmic_negativity(sigma).e_n;
    } catch (const ComplexEigenvalue&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

json negativity_report(const gs::CovMatrix& on, const gs::CovMatrix& off, const gs::CovMatrix& sigma,
                       double gain_uncertainty_db) {
    json j;
    j["covariance"] = gs::to_json(sigma);
    j["physical"] = gs::is_physical(sigma);
    try {
        const gs::Negativity n = gs::logarithmic_negativity(sigma);
        j["e_n"] = n.e_n;
        j["nu_minus"] = n.nu_minus;
        // First-order propagation of the per-entry standard errors.
        const double h = 1e-6;
        double var = 0.0;
        for (int a = 0; a < 4; ++a) {
            for (int b = a; b < 4; ++b) {
                gs::CovMatrix up = sigma;
                gs::CovMatrix dn = sigma;
                up.entries(a, b) += h;
                dn.entries(a, b) -= h;
                if (a != b) {
                    up.entries(b, a) += h;
                    dn.entries(b, a) -= h;
                }
                const double d = (negativity_or_nan(up) - negativity_or_nan(dn)) / (2.0 * h);
                if (std::isfinite(d)) {
                    var += d * d * sigma.uncertainty(a, b) * sigma.uncertainty(a, b);
                }
            }
        }
        j["e_n_stat"] = std::sqrt(var);
    } catch (const ComplexEigenvalue& e) {
        j["e_n"] = nullptr;
        j["nu_minus"] = nullptr;
        j["error"] = e.what();
    }
    json band = json::array();
    for (double sign : {+1.0, -1.0}) {
        const double scale = std::pow(10.0, -sign * gain_uncertainty_db / 10.0);
        const double e = negativity_or_nan(gs::subtract_background_scaled(on, off, scale));
        band.push_back({{"gain_offset_db", sign * gain_uncertainty_db}, {"e_n", null_or(e)}});
    }
    j["gain_systematic"] = band;
    return j;
}

// ON and OFF batches of a quadrature file with the given dimension.
std::pair<gs::CovMatrix, gs::CovMatrix> file_covariances(const std::string& path, int dim) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open quadrature file " + path);
    }
    const gs::QuadratureFile file = gs::read_quadrature_csv(in);
    const gs::QuadratureBatch* on = nullptr;
    const gs::QuadratureBatch* off = nullptr;
    for (const auto& b : file.batches) {
        if (b.dim() != dim) {
            throw DimensionMismatch(path + ": expected " + std::to_string(dim / 2) + " mode(s)");
        }
        (b.pump_state() == gs::PumpState::On ? on : off) = &b;
    }
    if (!on || !off) {
        throw FormatError(path + ": needs both ON and OFF records");
    }
    auto normalized = [&](const gs::QuadratureBatch& b) {
        return b.normalized() ? b : b.normalized_by(file.normalization_factor);
    };
    return {gs::estimate_covariance(normalized(*on)), gs::estimate_covariance(normalized(*off))};
}

json sntj_report(const calibration::FitResult& r) {
    json cov = json::array();
    for (int i = 0; i < 3; ++i) {
        cov.push_back({r.covariance(i, 0), r.covariance(i, 1), r.covariance(i, 2)});
    }
    return {{"frequency", r.model.frequency},
            {"bandwidth", r.model.bandwidth},
            {"g_sys_db", r.model.g_sys_db()},
            {"g_sys_db_error", r.g_sys_db_error},
            {"t_sys", r.model.t_sys},
            {"t_sys_error", r.t_sys_error},
            {"t_electron", r.model.t_electron},
            {"t_electron_error", r.t_electron_error},
            {"covariance_g_tsys_te", cov},
            {"residual_norm", r.residual_norm},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"quantum_regime_warning", r.model.quantum_regime_warning()}};
}

}  // namespace

std::string Output::primary() const { return is_csv() ? csv : json.dump(2) + "\n"; }

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"coeffs", "flux-sweep", "gain-phase", "sms",
                                                "tms",    "sntj-fit",   "normalize",  "attenuation"};
    return names;
}

std::string git_revision() { return TWPA_GIT_REVISION; }

Output cmd_coeffs(const config::RunConfig& cfg) {
    const std::vector<double> flux = cfg.coeffs.flux.resolve();
    const auto coeffs = snail::coefficient_sweep(cfg.coeffs.r, cfg.coeffs.i_c, flux);
    Table t("coeffs", cfg, {"flux", "alpha_tilde", "beta", "gamma", "phi_star", "inductance"});
    for (std::size_t i = 0; i < flux.size(); ++i) {
        const auto& c = coeffs[i];
        t.row({num(flux[i]), num(c.alpha_tilde), num(c.beta), num(c.gamma), num(c.phi_star),
               num(c.inductance)});
    }
    Output out;
    out.csv = t.str();
    json extrema = json::array();
    for (const auto& e : snail::beta_extrema(flux, coeffs)) {
        extrema.push_back({{"flux", e.flux_phi0}, {"beta", e.beta}});
    }
    out.meta["gamma_zero_crossings"] = snail::gamma_zero_crossings(flux, coeffs);
    out.meta["beta_extrema"] = extrema;
    return out;
}

Output cmd_flux_sweep(const config::RunConfig& cfg, const Progress& progress) {
    const auto& d = cfg.drive;
    const auto d3 = circuit::three_wave_drive(d.pump_frequency, d.pump_current, d.signal_current,
                                              d.detuning, d.base());
    const auto d4 = circuit::four_wave_drive(d.pump_frequency, d.pump_current, d.signal_current,
                                             d.detuning, d.base());
    const std::vector<double> flux = cfg.flux_sweep.flux.resolve();
    const auto rows = circuit::flux_sweep_idler(cfg.resolved_chain(), d3, d4, flux,
                                                sweep_options(cfg, "flux-sweep", progress));

    // Nearest grid row for each marked flux.
    std::vector<std::string> mark_of(rows.size());
    json marks = json::array();
    for (std::size_t m = 0; m < cfg.flux_sweep.marks.size(); ++m) {
        const double target = cfg.flux_sweep.marks[m];
        std::size_t best = 0;
        for (std::size_t i = 1; i < flux.size(); ++i) {
            if (std::abs(flux[i] - target) < std::abs(flux[best] - target)) {
                best = i;
            }
        }
        const std::string label = "phi" + std::to_string(m + 1);
        mark_of[best] += (mark_of[best].empty() ? "" : "+") + label;
        marks.push_back({{"label", label}, {"flux", target}, {"row", best}, {"row_flux", flux[best]}});
    }

    Table t("flux-sweep", cfg,
            {"flux", "psd_3wm_idler_dbm", "psd_4wm_idler_dbm", "psd_3wm_signal_dbm",
             "psd_4wm_signal_dbm", "mark"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        t.row({num(r.flux_phi0), num(r.psd_3wm_idler_dbm), num(r.psd_4wm_idler_dbm),
               num(r.psd_3wm_signal_dbm), num(r.psd_4wm_signal_dbm), mark_of[i]});
    }
    Output out;
    out.csv = t.str();
    const auto r3 = d3.resolved();
    const auto r4 = d4.resolved();
    out.meta["marks"] = marks;
    out.meta["tones"] = {
        {"pump", r3.tones[0].frequency},
        {"signal_3wm", r3.tones[1].frequency},
        {"idler_3wm", r3.tones[0].frequency - r3.tones[1].frequency},
        {"signal_4wm", r4.tones[1].frequency},
        {"idler_4wm", 2.0 * r4.tones[0].frequency - r4.tones[1].frequency},
        {"resolution", r3.resolution()},
        {"dt", r3.dt},
    };
    return out;
}

Output cmd_gain_phase(const config::RunConfig& cfg, const Progress& progress) {
    const auto& d = cfg.drive;
    const circuit::Tone pump{d.pump_frequency, cfg.gain_phase.pump_current.value_or(d.pump_current), 0.0};
    const circuit::Tone signal{d.pump_frequency / 2.0, d.signal_current, 0.0};
    const std::vector<double> phase = cfg.gain_phase.phase.resolve();
    const auto rows = circuit::degenerate_gain_vs_phase(cfg.resolved_chain(), cfg.gain_phase.flux,
                                                        pump, signal, phase, d.base(),
                                                        sweep_options(cfg, "gain-phase", progress));
    Table t("gain-phase", cfg, {"pump_phase", "gain_db"});
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& r : rows) {
        t.row({num(r.pump_phase), num(r.gain_db)});
        lo = std::min(lo, r.gain_db);
        hi = std::max(hi, r.gain_db);
    }
    Output out;
    out.csv = t.str();
    out.meta["gain_max_db"] = hi;
    out.meta["gain_min_db"] = lo;
    out.meta["contrast_db"] = hi - lo;
    return out;
}

PipelineResult synthetic_pipeline(const gs::CovMatrix& state, double added_photons, double gain_drift,
                                  double gain_uncertainty_db, std::int64_t n_rep,
                                  std::uint64_t seed_on, std::uint64_t seed_off, double upsilon) {
    const int dim = state.dim();
    const Eigen::MatrixXd noise = 2.0 * added_photons * Eigen::MatrixXd::Identity(dim, dim);
    const gs::CovMatrix on_target((1.0 + gain_drift) * (state.entries + noise));
    const gs::CovMatrix off_target(Eigen::MatrixXd::Identity(dim, dim) + noise);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);

    // Through digitizer units and back, as measured records would be.
    auto measure = [&](const gs::CovMatrix& target, std::uint64_t seed, gs::PumpState ps) {
        const gs::QuadratureBatch b = gs::sample_gaussian(target, zero, n_rep, seed, ps);
        const gs::QuadratureBatch raw(b.mode_labels(), b.records() / upsilon, ps, false);
        return gs::estimate_covariance(raw.normalized_by(upsilon));
    };
    PipelineResult r;
    r.sigma_on = measure(on_target, seed_on, gs::PumpState::On);
    r.sigma_off = measure(off_target, seed_off, gs::PumpState::Off);
    r.sigma = gs::subtract_background(r.sigma_on, r.sigma_off, gain_uncertainty_db);
    return r;
}

Output cmd_sms(const config::RunConfig& cfg, const Progress& progress) {
    const auto& s = cfg.sms;
    const double upsilon = calibration::normalization_factor(normalization_params(cfg));
    Output out;
    json points = json::array();
    if (!s.input.empty()) {
        const auto [on, off] = file_covariances(s.input, 2);
        json p = squeezing_report(on, off, gs::subtract_background(on, off, s.gain_uncertainty_db),
                                  s.gain_uncertainty_db);
        p["pump_phase"] = nullptr;
        points.push_back(p);
    } else {
        const std::vector<double> phase = s.phase.resolve();
        const double v_sq = std::pow(10.0, -s.squeeze_db / 10.0);
        const double v_anti = s.antisqueeze_db > 0.0 ? std::pow(10.0, s.antisqueeze_db / 10.0) : 1.0 / v_sq;
        const auto results = circuit::parallel_map<json>(
            phase.size(), cfg.threads, [&](std::size_t i) {
                const double axis = phase[i] / 2.0;
                Eigen::Matrix2d rot;
                rot << std::cos(axis), -std::sin(axis), std::sin(axis), std::cos(axis);
                const gs::CovMatrix state(rot * Eigen::Vector2d(v_sq, v_anti).asDiagonal() *
                                          rot.transpose());
                const PipelineResult r = synthetic_pipeline(
                    state, s.added_photons, s.gain_drift, s.gain_uncertainty_db, s.n_rep,
                    config::derive_seed(cfg.master_seed, 2 * i),
                    config::derive_seed(cfg.master_seed, 2 * i + 1), upsilon);
                json p = squeezing_report(r.sigma_on, r.sigma_off, r.sigma, s.gain_uncertainty_db);
                p["pump_phase"] = phase[i];
                if (progress) {
                    progress("sms", i + 1, phase.size());
                }
                return p;
            });
        for (const auto& p : results) {
            points.push_back(p);
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        if (p["s_min_db"].is_number()) {
            best = std::min(best, p["s_min_db"].get<double>());
        }
    }
    out.json = {{"schema", "twpa-sms"},
                {"schema_version", kSchemaVersion},
                {"config_hash", config::config_hash(cfg)},
                {"normalization_factor", upsilon},
                {"s_min_db", null_or(best)},
                {"points", points}};
    return out;
}

Output cmd_tms(const config::RunConfig& cfg, const Progress& progress) {
    const auto& t = cfg.tms;
    const double upsilon = calibration::normalization_factor(normalization_params(cfg));
    json points = json::array();
    if (!t.input.empty()) {
        const auto [on, off] = file_covariances(t.input, 4);
        json p = negativity_report(on, off, gs::subtract_background(on, off, t.gain_uncertainty_db),
                                   t.gain_uncertainty_db);
        p["r"] = nullptr;
        points.push_back(p);
    } else {
        const std::vector<double> r = t.r.resolve();
        const auto results = circuit::parallel_map<json>(r.size(), cfg.threads, [&](std::size_t i) {
            const PipelineResult res = synthetic_pipeline(
                gs::two_mode_squeezed(r[i], t.thermal_photons), t.added_photons, t.gain_drift,
                t.gain_uncertainty_db, t.n_rep, config::derive_seed(cfg.master_seed, 2 * i),
                config::derive_seed(cfg.master_seed, 2 * i + 1), upsilon);
            json p = negativity_report(res.sigma_on, res.sigma_off, res.sigma, t.gain_uncertainty_db);
            p["r"] = r[i];
            p["e_n_exact"] = std::max(0.0, -std::log(gs::logarithmic_negativity(
                                                         gs::two_mode_squeezed(r[i], t.thermal_photons))
                                                         .nu_minus));
            if (progress) {
                progress("tms", i + 1, r.size());
            }
            return p;
        });
        for (const auto& p : results) {
            points.push_back(p);
        }
    }
    Output out;
    out.json = {{"schema", "twpa-tms"},
                {"schema_version", kSchemaVersion},
                {"config_hash", config::config_hash(cfg)},
                {"normalization_factor", upsilon},
                {"points", points}};
    return out;
}

Output cmd_sntj_fit(const config::RunConfig& cfg) {
    const auto& s = cfg.sntj_fit;
    calibration::SntjModel guess;
    guess.g_sys = calibration::db_to_linear(s.guess_g_sys_db);
    guess.t_sys = s.guess_t_sys;
    guess.t_electron = s.guess_t_electron;

    json fits = json::array();
    if (!s.input.empty()) {
        std::ifstream in(s.input);
        if (!in) {
            throw ConfigError("cannot open SNTJ data file " + s.input);
        }
        for (const auto& series : calibration::read_sntj_csv(in, s.frequency)) {
            guess.frequency = series.frequency;
            guess.bandwidth = s.bandwidth;
            fits.push_back(sntj_report(
                calibration::fit_sntj(series.data, series.frequency, s.bandwidth, guess)));
        }
    } else {
        for (std::size_t i = 0; i < s.synthetic_offsets.size(); ++i) {
            calibration::SntjModel truth;
            truth.frequency = cfg.drive.pump_frequency / 2.0 + s.synthetic_offsets[i];
            truth.bandwidth = s.bandwidth;
            truth.t_electron = s.synthetic_t_electron;
            truth.t_sys = s.synthetic_t_sys;
            truth.g_sys = calibration::db_to_linear(s.synthetic_gains_db[i]);
            const auto data = calibration::synthetic_sntj(truth, s.synthetic_v_max, s.synthetic_points,
                                                          s.synthetic_noise,
                                                          config::derive_seed(cfg.master_seed, i));
            guess.frequency = truth.frequency;
            guess.bandwidth = truth.bandwidth;
            json f = sntj_report(calibration::fit_sntj(data, truth.frequency, truth.bandwidth, guess));
            f["truth"] = {{"g_sys_db", s.synthetic_gains_db[i]},
                          {"t_sys", truth.t_sys},
                          {"t_electron", truth.t_electron}};
            fits.push_back(f);
        }
    }
    Output out;
    out.json = {{"schema", "twpa-sntj-fit"},
                {"schema_version", kSchemaVersion},
                {"config_hash", config::config_hash(cfg)},
                {"fits", fits}};
    return out;
}

Output cmd_normalize(const config::RunConfig& cfg) {
    const auto p = normalization_params(cfg);
    const double upsilon = calibration::normalization_factor(p);
    auto at_offset = [&](double db) {
        auto q = p;
        q.g_sys *= calibration::db_to_linear(db);
        return calibration::normalization_factor(q);
    };
    Output out;
    out.json = {{"schema", "twpa-normalize"},
                {"schema_version", kSchemaVersion},
                {"config_hash", config::config_hash(cfg)},
                {"eta", p.eta},
                {"eta_db", calibration::linear_to_db(p.eta)},
                {"eta_from_chain", !cfg.normalize.eta.has_value()},
                {"g_sys_db", cfg.normalize.g_sys_db},
                {"corrected_gain_db", calibration::linear_to_db(p.corrected_gain())},
                {"f_acq", p.f_acq},
                {"t_int", p.t_int},
                {"epsilon", p.epsilon},
                {"z0", p.z0},
                {"upsilon", upsilon},
                {"upsilon_gain_plus_1db", at_offset(+1.0)},
                {"upsilon_gain_minus_1db", at_offset(-1.0)}};
    return out;
}

Output cmd_attenuation(const config::RunConfig& cfg) {
    const auto& a = cfg.attenuation;
    const double eta_db = a.eta_db ? *a.eta_db
                                   : calibration::linear_to_db(chain_eta(cfg, a.frequency, a.flux, 1.0));
    const auto ledger = calibration::input_attenuation(a.s21_off_db, eta_db, a.g_sys_db);
    Output out;
    out.json = {{"schema", "twpa-attenuation"},
                {"schema_version", kSchemaVersion},
                {"config_hash", config::config_hash(cfg)},
                {"s21_off_db", ledger.s21_off_db},
                {"eta_db", ledger.eta_db},
                {"eta_from_chain", !a.eta_db.has_value()},
                {"g_sys_db", ledger.g_sys_db},
                {"a_in_db", ledger.a_in_db}};
    return out;
}

Output run_command(const std::string& name, const config::RunConfig& cfg, const Progress& progress) {
    if (name == "coeffs") return cmd_coeffs(cfg);
    if (name == "flux-sweep") return cmd_flux_sweep(cfg, progress);
    if (name == "gain-phase") return cmd_gain_phase(cfg, progress);
    if (name == "sms") return cmd_sms(cfg, progress);
    if (name == "tms") return cmd_tms(cfg, progress);
    if (name == "sntj-fit") return cmd_sntj_fit(cfg);
    if (name == "normalize") return cmd_normalize(cfg);
    if (name == "attenuation") return cmd_attenuation(cfg);
    throw ConfigError("unknown command '" + name + "'");
}

void write_output(const std::string& name, const config::RunConfig& cfg, const Output& out) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    auto write = [&](const fs::path& p, const std::string& bytes) {
        std::ofstream f(p, std::ios::binary);
        f << bytes;
        if (!f) {
            throw std::runtime_error("cannot write " + p.string());
        }
    };
    write(dir / (out.is_csv() ? "result.csv" : "result.json"), out.primary());
    json meta = {{"command", name},
                 {"schema_version", kSchemaVersion},
                 {"config_hash", config::config_hash(cfg)},
                 {"master_seed", cfg.master_seed},
                 {"chain_seed", cfg.chain_seed()},
                 {"git_revision", git_revision()},
                 {"config", config::to_json(cfg)}};
    for (const auto& [k, v] : out.meta.items()) {
        meta[k] = v;
    }
    write(dir / "meta.json", meta.dump(2) + "\n");
}

}  // namespace twpa::cli
