#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace twpa::calibration {

[[nodiscard]] inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
[[nodiscard]] inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Shot-noise tunnel junction seen through the amplification chain.
struct SntjModel {
    double frequency = 0.0;   // [Hz]
    double bandwidth = 0.0;   // [Hz]
    double t_electron = 0.0;  // [K]
    double t_sys = 0.0;       // [K]
    double g_sys = 0.0;       // linear power gain

    void validate() const;
    [[nodiscard]] double g_sys_db() const { return linear_to_db(g_sys); }
    /// k_B T >= h f / 5: thermal rounding of the knee is no longer small.
    [[nodiscard]] bool quantum_regime_warning() const;
};

/// Noise power at the analyzer for bias `v_bias`:
///   { 1/2 [ (eV+hf)/2k coth((eV+hf)/2kT) + (eV-hf)/2k coth((eV-hf)/2kT) ] + T_sys } BW G k
/// Each x coth(x) term is evaluated as 1 + x^2/3 for |x| < 1e-6.
[[nodiscard]] double sntj_noise_power(const SntjModel& model, double v_bias);

struct SntjDataset {
    std::vector<double> v_bias;  // [V]
    std::vector<double> psd;     // [W]
    std::vector<double> sigma;   // optional per-point weights (standard deviations)
};

/// Symmetric bias grid of `points` values on [-v_max, v_max] with the model
/// PSD times (1 + relative_noise * n), n standard normal from a
/// std::mt19937_64 seeded with `seed`.
[[nodiscard]] SntjDataset synthetic_sntj(const SntjModel& model, double v_max, int points,
                                         double relative_noise, std::uint64_t seed);

/// Reads `v_bias,psd[,frequency]` rows (header line required; '#' lines are
/// comments) grouped by frequency in order of first appearance. Without a
/// frequency column every row belongs to `default_frequency`.
struct SntjSeries {
    double frequency = 0.0;
    SntjDataset data;
};
[[nodiscard]] std::vector<SntjSeries> read_sntj_csv(std::istream& in, double default_frequency);

struct FitOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-9;  // relative parameter step
    double max_condition = 1e12;   // of the scaled normal matrix
};

struct FitResult {
    SntjModel model;
    /// Covariance of (g_sys [linear], t_sys [K], t_electron [K]).
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    double g_sys_db_error = 0.0;
    double t_sys_error = 0.0;
    double t_electron_error = 0.0;
    double residual_norm = 0.0;  // weighted, in units of the data scale
    int iterations = 0;
    bool converged = false;
};

/// Levenberg-Marquardt fit of (G_sys, T_sys, T) with uniform weights unless
/// dataset.sigma is given. Parameters are fitted in log space so that they
/// stay positive; the reported covariance is mapped back to linear units.
///
/// Throws IllConditioned when fewer than 10 points are given, when max |eV|
/// is below 2 h f (T and T_sys cannot be told apart), or when the normal
/// matrix at the solution is near singular. Throws FitDivergence carrying the
/// last iterate if the iteration budget runs out.
[[nodiscard]] FitResult fit_sntj(const SntjDataset& data, double frequency, double bandwidth,
                                 const SntjModel& initial_guess, const FitOptions& options = {});

struct NormalizationParams {
    double eta = 1.0;        // device insertion loss, linear (0, 1]
    double g_sys = 1.0;      // SNTJ-calibrated system gain, linear
    double z0 = 50.0;        // [ohm]
    double f_acq = 0.0;      // [Hz]
    double t_int = 10e-6;    // [s]
    double epsilon = 0.98;   // full scale -> volt
    /// Upper bound of the loss between the SNTJ and the isolator input. The
    /// gain from the device output is larger than the SNTJ-referenced one by at
    /// most this much; using the bound makes the squeezing estimate a lower bound.
    double loss_correction_db = 1.0;

    void validate() const;
    [[nodiscard]] double corrected_gain() const { return g_sys * db_to_linear(loss_correction_db); }
};

/// upsilon = epsilon sqrt(eta t_int / (G Z0 h f_acq)) with G = corrected_gain().
[[nodiscard]] double normalization_factor(const NormalizationParams& params);

struct AttenuationLedger {
    double s21_off_db = 0.0;
    double eta_db = 0.0;
    double g_sys_db = 0.0;
    double a_in_db = 0.0;
};

/// a_in = s21_off - eta - g_sys (all in dB).
[[nodiscard]] AttenuationLedger input_attenuation(double s21_off_db, double eta_db, double g_sys_db);

/// Small-signal elements of one ladder cell.
struct LadderCell {
    double inductance = 0.0;  // SNAIL linear inductance [H]
    double c_j = 0.0;         // [F]
    double c_g = 0.0;         // [F]
};

/// Complex per-cell propagation constant gamma*a from cosh(gamma a) = 1 + Z Y / 2,
/// Z = jwL || 1/(jwC_J), Y = jwC_g / (1 + j tan_delta).
[[nodiscard]] std::complex<double> propagation_constant(const LadderCell& cell, double tan_delta,
                                                        double frequency);

/// Power transmission exp(-2 N Re(gamma a)) of `n_cells` lossy cells.
/// `chain_fraction` scales the number of cells that count (1 = full chain).
[[nodiscard]] double insertion_loss_from_tan_delta(double tan_delta, int n_cells, double frequency,
                                                   const LadderCell& cell,
                                                   double chain_fraction = 1.0);

}  // namespace twpa::calibration
