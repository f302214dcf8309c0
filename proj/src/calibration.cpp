#include "twpa/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "twpa/constants.hpp"
#include "twpa/errors.hpp"

namespace twpa::calibration {

using constants::boltzmann;
using constants::elementary_charge;
using constants::planck;

namespace {
constexpr double kSeriesThreshold = 1e-6;

// x coth(x), removable singularity at 0.
double x_coth_x(double x) {
    if (std::abs(x) < kSeriesThreshold) {
        return 1.0 + x * x / 3.0;
    }
    return x / std::tanh(x);
}

// (x / sinh x)^2, the T-derivative kernel of T x coth x at fixed T x.
double x_csch_x_sq(double x) {
    const double ax = std::abs(x);
    if (ax < kSeriesThreshold) {
        return 1.0 - x * x / 3.0;
    }
    if (ax > 350.0) {
        return 0.0;
    }
    const double q = x / std::sinh(x);
    return q * q;
}

struct Terms {
    double plus;   // (eV + hf) / 2kT
    double minus;  // (eV - hf) / 2kT
};

Terms reduced_energies(double v, double f, double t) {
    const double ev = elementary_charge * v;
    const double hf = planck * f;
    const double kt2 = 2.0 * boltzmann * t;
    return {(ev + hf) / kt2, (ev - hf) / kt2};
}

// Noise temperature of the junction alone: (T/2) [x+ coth x+ + x- coth x-].
double junction_temperature(double v, double f, double t) {
    const Terms y = reduced_energies(v, f, t);
    return 0.5 * t * (x_coth_x(y.plus) + x_coth_x(y.minus));
}
}  // namespace

void SntjModel::validate() const {
    if (!(frequency > 0.0) || !(bandwidth > 0.0) || !(t_electron > 0.0) || !(t_sys > 0.0) ||
        !(g_sys > 0.0)) {
        throw std::invalid_argument("SNTJ model parameters must all be positive");
    }
}

bool SntjModel::quantum_regime_warning() const {
    return boltzmann * t_electron >= planck * frequency / 5.0;
}

double sntj_noise_power(const SntjModel& model, double v_bias) {
    model.validate();
    const double t_noise = junction_temperature(v_bias, model.frequency, model.t_electron);
    return (t_noise + model.t_sys) * model.bandwidth * model.g_sys * boltzmann;
}

SntjDataset synthetic_sntj(const SntjModel& model, double v_max, int points, double relative_noise,
                           std::uint64_t seed) {
    model.validate();
    if (points < 2 || !(v_max > 0.0)) {
        throw std::invalid_argument("synthetic SNTJ grid needs v_max > 0 and at least 2 points");
    }
    SntjDataset data;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int i = 0; i < points; ++i) {
        const double v = -v_max + 2.0 * v_max * i / static_cast<double>(points - 1);
        data.v_bias.push_back(v);
        data.psd.push_back(sntj_noise_power(model, v) * (1.0 + relative_noise * normal(rng)));
    }
    return data;
}

std::vector<SntjSeries> read_sntj_csv(std::istream& in, double default_frequency) {
    std::string line;
    int col_v = -1;
    int col_p = -1;
    int col_f = -1;
    std::vector<SntjSeries> out;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) {
            fields.push_back(f);
        }
        if (col_v < 0) {
            for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
                if (fields[i] == "v_bias") col_v = i;
                if (fields[i] == "psd") col_p = i;
                if (fields[i] == "frequency") col_f = i;
            }
            if (col_v < 0 || col_p < 0) {
                throw FormatError("SNTJ CSV header must name v_bias and psd columns");
            }
            continue;
        }
        const auto need = static_cast<std::size_t>(std::max({col_v, col_p, col_f}));
        if (fields.size() <= need) {
            throw FormatError("SNTJ CSV line " + std::to_string(line_no) + ": too few fields");
        }
        double v = 0.0;
        double p = 0.0;
        double freq = default_frequency;
        try {
            v = std::stod(fields[static_cast<std::size_t>(col_v)]);
            p = std::stod(fields[static_cast<std::size_t>(col_p)]);
            if (col_f >= 0) {
                freq = std::stod(fields[static_cast<std::size_t>(col_f)]);
            }
        } catch (const std::exception&) {
            throw FormatError("SNTJ CSV line " + std::to_string(line_no) + ": not a number");
        }
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const SntjSeries& s) { return s.frequency == freq; });
        if (it == out.end()) {
            out.push_back({freq, {}});
            it = std::prev(out.end());
        }
        it->data.v_bias.push_back(v);
        it->data.psd.push_back(p);
    }
    if (out.empty()) {
        throw FormatError("SNTJ CSV contains no data rows");
    }
    return out;
}

FitResult fit_sntj(const SntjDataset& data, double frequency, double bandwidth,
                   const SntjModel& initial_guess, const FitOptions& options) {
    const std::size_t n = data.v_bias.size();
    if (data.psd.size() != n || (!data.sigma.empty() && data.sigma.size() != n)) {
        throw std::invalid_argument("v_bias, psd and sigma must have equal length");
    }
    if (n < 10) {
        throw IllConditioned("need at least 10 bias points, got " + std::to_string(n));
    }
    double max_ev = 0.0;
    for (double v : data.v_bias) {
        max_ev = std::max(max_ev, std::abs(elementary_charge * v));
    }
    if (max_ev < 2.0 * planck * frequency) {
        throw IllConditioned("bias range max|eV| = " + std::to_string(max_ev / (planck * frequency)) +
                             " hf is below 2 hf; T and T_sys are degenerate");
    }

    double scale = 0.0;
    for (double p : data.psd) {
        scale += std::abs(p);
    }
    scale /= static_cast<double>(n);
    if (!(scale > 0.0)) {
        throw IllConditioned("PSD data are all zero");
    }
    Eigen::VectorXd weight(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        weight(static_cast<Eigen::Index>(i)) = data.sigma.empty() ? 1.0 / scale : 1.0 / data.sigma[i];
    }

    SntjModel guess = initial_guess;
    guess.frequency = frequency;
    guess.bandwidth = bandwidth;
    guess.validate();

    // p = log(G), log(T_sys), log(T)
    Eigen::Vector3d p(std::log(guess.g_sys), std::log(guess.t_sys), std::log(guess.t_electron));
    const double gain_unit = bandwidth * boltzmann;

    auto evaluate = [&](const Eigen::Vector3d& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        const double g = std::exp(q(0));
        const double ts = std::exp(q(1));
        const double te = std::exp(q(2));
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            const double tj = junction_temperature(data.v_bias[i], frequency, te);
            const double model = (tj + ts) * gain_unit * g;
            r(k) = weight(k) * (model - data.psd[i]);
            if (jac) {
                const Terms y = reduced_energies(data.v_bias[i], frequency, te);
                const double dtj = 0.5 * te * (x_csch_x_sq(y.plus) + x_csch_x_sq(y.minus));
                (*jac)(k, 0) = weight(k) * model;
                (*jac)(k, 1) = weight(k) * ts * gain_unit * g;
                (*jac)(k, 2) = weight(k) * dtj * gain_unit * g;
            }
        }
    };

    const auto m = static_cast<Eigen::Index>(n);
    Eigen::VectorXd r(m), r_trial(m);
    Eigen::MatrixXd jac(m, 3);
    evaluate(p, r, &jac);
    double cost = r.squaredNorm();
    double lambda = 1e-3;

    FitResult result;
    for (int it = 1; it <= options.max_iterations; ++it) {
        result.iterations = it;
        const Eigen::Matrix3d jtj = jac.transpose() * jac;
        const Eigen::Vector3d grad = jac.transpose() * r;
        bool accepted = false;
        Eigen::Vector3d step = Eigen::Vector3d::Zero();
        for (int tries = 0; tries < 60; ++tries) {
            Eigen::Matrix3d a = jtj;
            a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
            step = a.ldlt().solve(-grad);
            const Eigen::Vector3d trial = p + step;
            evaluate(trial, r_trial, nullptr);
            const double trial_cost = r_trial.squaredNorm();
            if (std::isfinite(trial_cost) && trial_cost <= cost) {
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No downhill step at any damping: already at the minimum to
            // working precision.
            result.converged = true;
            break;
        }
        evaluate(p, r, &jac);
        cost = r.squaredNorm();
        // Relative step in linear parameters equals the log-space step.
        if (step.cwiseAbs().maxCoeff() < options.step_tolerance || cost == 0.0) {
            result.converged = true;
            break;
        }
    }

    result.model = guess;
    result.model.g_sys = std::exp(p(0));
    result.model.t_sys = std::exp(p(1));
    result.model.t_electron = std::exp(p(2));
    result.residual_norm = std::sqrt(cost);
    if (!result.converged) {
        throw FitDivergence("no convergence after " + std::to_string(result.iterations) +
                            " iterations; last iterate G=" + std::to_string(result.model.g_sys_db()) +
                            " dB, T_sys=" + std::to_string(result.model.t_sys) +
                            " K, T=" + std::to_string(result.model.t_electron) +
                            " K, residual=" + std::to_string(result.residual_norm));
    }

    // Covariance from the Jacobian at the solution, column-scaled for the
    // conditioning test.
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d d = jtj.diagonal().cwiseSqrt();
    if ((d.array() <= 0.0).any()) {
        throw IllConditioned("a parameter has no influence on the residuals");
    }
    const Eigen::Matrix3d scaled = d.cwiseInverse().asDiagonal() * jtj * d.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scaled);
    const double cond = es.eigenvalues().maxCoeff() / std::max(es.eigenvalues().minCoeff(), 1e-300);
    if (cond > options.max_condition) {
        throw IllConditioned("normal matrix condition number " + std::to_string(cond));
    }
    const double dof = static_cast<double>(n) - 3.0;
    // With unit weights the residual variance sets the noise scale.
    const double s2 = data.sigma.empty() ? cost / dof : 1.0;
    const Eigen::Matrix3d cov_log = s2 * jtj.inverse();
    const Eigen::Vector3d lin(result.model.g_sys, result.model.t_sys, result.model.t_electron);
    result.covariance = lin.asDiagonal() * cov_log * lin.asDiagonal();
    result.g_sys_db_error = 10.0 / std::log(10.0) * std::sqrt(cov_log(0, 0));
    result.t_sys_error = std::sqrt(result.covariance(1, 1));
    result.t_electron_error = std::sqrt(result.covariance(2, 2));
    return result;
}

void NormalizationParams::validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw std::invalid_argument("eta must lie in (0, 1]");
    }
    if (!(t_int > 0.0) || !(f_acq > 0.0) || !(g_sys > 0.0) || !(z0 > 0.0) || !(epsilon > 0.0)) {
        throw std::invalid_argument("t_int, f_acq, g_sys, z0 and epsilon must be positive");
    }
}

double normalization_factor(const NormalizationParams& params) {
    params.validate();
    return params.epsilon * std::sqrt(params.eta * params.t_int /
                                      (params.corrected_gain() * params.z0 * planck * params.f_acq));
}

AttenuationLedger input_attenuation(double s21_off_db, double eta_db, double g_sys_db) {
    return {s21_off_db, eta_db, g_sys_db, s21_off_db - eta_db - g_sys_db};
}

std::complex<double> propagation_constant(const LadderCell& cell, double tan_delta,
                                          double frequency) {
    using namespace std::complex_literals;
    const double w = constants::two_pi * frequency;
    const std::complex<double> z = 1.0 / (1.0 / (1i * w * cell.inductance) + 1i * w * cell.c_j);
    const std::complex<double> y = 1i * w * cell.c_g / (1.0 + 1i * tan_delta);
    std::complex<double> g = std::acosh(1.0 + z * y / 2.0);
    // Decaying branch.
    if (g.real() < 0.0) {
        g = -g;
    }
    return g;
}

double insertion_loss_from_tan_delta(double tan_delta, int n_cells, double frequency,
                                     const LadderCell& cell, double chain_fraction) {
    if (tan_delta == 0.0) {
        return 1.0;
    }
    const double alpha = propagation_constant(cell, tan_delta, frequency).real();
    return std::exp(-2.0 * alpha * chain_fraction * static_cast<double>(n_cells));
}

}  // namespace twpa::calibration
