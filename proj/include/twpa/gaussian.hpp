#pragma once

// Gaussian-state analysis of quadrature records in the convention where the
// vacuum covariance is the identity: x = (a + a^dag)/2, p = (a - a^dag)/2i,
// sigma_mn = 4 [ <{R_m, R_n}>/2 - <R_m><R_n> ].

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace twpa::gaussian {

enum class PumpState { On, Off };

[[nodiscard]] std::string to_string(PumpState s);
[[nodiscard]] PumpState pump_state_from_string(const std::string& s);

/// N_rep samples of (x, p) per mode, one row per repetition laid out as
/// (x_1, p_1, x_2, p_2, ...).
class QuadratureBatch {
public:
    QuadratureBatch() = default;
    QuadratureBatch(std::vector<std::string> mode_labels, Eigen::MatrixXd records,
                    PumpState pump_state, bool normalized);

    [[nodiscard]] const std::vector<std::string>& mode_labels() const { return mode_labels_; }
    [[nodiscard]] const Eigen::MatrixXd& records() const { return records_; }
    [[nodiscard]] PumpState pump_state() const { return pump_state_; }
    [[nodiscard]] bool normalized() const { return normalized_; }
    [[nodiscard]] Eigen::Index n_rep() const { return records_.rows(); }
    [[nodiscard]] int dim() const { return static_cast<int>(records_.cols()); }

    /// Multiplies every quadrature by `factor` (full-scale units -> sqrt photon
    /// number) and marks the batch normalized.
    [[nodiscard]] QuadratureBatch normalized_by(double factor) const;

    /// Multiplies every quadrature by `factor` without touching the flag.
    [[nodiscard]] QuadratureBatch scaled(double factor) const;

private:
    std::vector<std::string> mode_labels_;
    Eigen::MatrixXd records_;
    PumpState pump_state_ = PumpState::Off;
    bool normalized_ = false;
};

struct CovMatrix {
    Eigen::MatrixXd entries;      // 2x2 or 4x4, symmetric
    Eigen::MatrixXd uncertainty;  // statistical standard error per entry
    Eigen::MatrixXd systematic;   // gain-calibration systematic per entry (zero if unknown)

    CovMatrix() = default;
    explicit CovMatrix(Eigen::MatrixXd m);

    [[nodiscard]] int dim() const { return static_cast<int>(entries.rows()); }
};

/// Throws NotNormalized, DegenerateBatch (N_rep < 2) or FormatError.
[[nodiscard]] CovMatrix estimate_covariance(const QuadratureBatch& batch);

/// sigma_on - sigma_off + 1. Statistical errors add in quadrature. If
/// gain_uncertainty_db > 0 the systematic field holds, per entry, the largest
/// shift of the result when both inputs are rescaled by 10^(+-dB/10), i.e. the
/// pipeline re-evaluated with the system gain off by that amount.
/// Throws DimensionMismatch.
[[nodiscard]] CovMatrix subtract_background(const CovMatrix& sigma_on, const CovMatrix& sigma_off,
                                            double gain_uncertainty_db = 0.0);

/// Same subtraction with both inputs scaled by `gain_scale` first (a system
/// gain assumed 1/gain_scale times the nominal one).
[[nodiscard]] CovMatrix subtract_background_scaled(const CovMatrix& sigma_on,
                                                   const CovMatrix& sigma_off, double gain_scale);

struct Squeezing {
    double s_x_db = 0.0;
    double s_p_db = 0.0;
};

/// 10 log10 of the diagonal (vacuum reference is 1). Negative is below
/// vacuum. Throws NonPositiveVariance instead of clamping.
[[nodiscard]] Squeezing squeezing_db(const CovMatrix& sigma);

struct Negativity {
    double e_n = 0.0;
    double nu_minus = 0.0;
};

/// Smallest symplectic eigenvalue of the partially transposed two-mode
/// covariance via Delta = det A + det B - 2 det C, and E_N = max(-ln nu, 0).
/// Throws ComplexEigenvalue when Delta^2 < 4 det sigma beyond rounding.
[[nodiscard]] Negativity logarithmic_negativity(const CovMatrix& sigma);

/// sigma + i Omega >= -tol (uncertainty principle in this convention).
[[nodiscard]] bool is_physical(const CovMatrix& sigma, double tol = 1e-9);

/// Standard symplectic form for dim/2 modes, blocks [[0, 1], [-1, 0]].
[[nodiscard]] Eigen::MatrixXd symplectic_form(int dim);

/// Seeded multivariate normal quadratures with covariance target/4, so
/// estimate_covariance recovers `target`. Cholesky first, symmetric
/// eigen-decomposition for semidefinite targets. Throws NotPSD.
[[nodiscard]] QuadratureBatch sample_gaussian(const CovMatrix& target, const Eigen::VectorXd& means,
                                              Eigen::Index n_rep, std::uint64_t seed,
                                              PumpState pump_state = PumpState::On);

// Reference states.
[[nodiscard]] CovMatrix vacuum(int dim);
/// Single-mode squeezed vacuum with x squeezed by `squeeze_db` (> 0 means below vacuum).
[[nodiscard]] CovMatrix squeezed_vacuum_db(double squeeze_db, double angle = 0.0);
/// Two-mode squeezed thermal state: A = B = (cosh 2r + 2 n) 1, C = sinh 2r Z.
[[nodiscard]] CovMatrix two_mode_squeezed(double r, double thermal_photons = 0.0);
/// Independent single-mode rotations of a two-mode covariance.
[[nodiscard]] CovMatrix rotate_modes(const CovMatrix& sigma, double theta_1, double theta_2);

}  // namespace twpa::gaussian
