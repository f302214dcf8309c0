#include "twpa/gaussian.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "twpa/errors.hpp"

namespace twpa::gaussian {

std::string to_string(PumpState s) { return s == PumpState::On ? "ON" : "OFF"; }

PumpState pump_state_from_string(const std::string& s) {
    if (s == "ON" || s == "on") {
        return PumpState::On;
    }
    if (s == "OFF" || s == "off") {
        return PumpState::Off;
    }
    throw FormatError("pump_state must be ON or OFF, got '" + s + "'");
}

QuadratureBatch::QuadratureBatch(std::vector<std::string> mode_labels, Eigen::MatrixXd records,
                                 PumpState pump_state, bool normalized)
    : mode_labels_(std::move(mode_labels)),
      records_(std::move(records)),
      pump_state_(pump_state),
      normalized_(normalized) {
    if (mode_labels_.empty() || mode_labels_.size() > 2) {
        throw FormatError("a batch holds one or two modes");
    }
    if (records_.cols() != static_cast<Eigen::Index>(2 * mode_labels_.size())) {
        throw FormatError("records need two columns (x, p) per mode");
    }
    if (!records_.allFinite()) {
        throw FormatError("non-finite quadrature sample");
    }
}

QuadratureBatch QuadratureBatch::normalized_by(double factor) const {
    return QuadratureBatch(mode_labels_, records_ * factor, pump_state_, true);
}

QuadratureBatch QuadratureBatch::scaled(double factor) const {
    return QuadratureBatch(mode_labels_, records_ * factor, pump_state_, normalized_);
}

CovMatrix::CovMatrix(Eigen::MatrixXd m)
    : entries(std::move(m)),
      uncertainty(Eigen::MatrixXd::Zero(entries.rows(), entries.cols())),
      systematic(Eigen::MatrixXd::Zero(entries.rows(), entries.cols())) {
    if (entries.rows() != entries.cols() || (entries.rows() != 2 && entries.rows() != 4)) {
        throw DimensionMismatch("covariance must be 2x2 or 4x4");
    }
}

CovMatrix estimate_covariance(const QuadratureBatch& batch) {
    if (!batch.normalized()) {
        throw NotNormalized("covariance estimation needs normalized quadratures");
    }
    const Eigen::Index n = batch.n_rep();
    if (n < 2) {
        throw DegenerateBatch("need at least two repetitions, got " + std::to_string(n));
    }
    const Eigen::Index d = batch.dim();
    const double nd = static_cast<double>(n);

    const Eigen::RowVectorXd mean = batch.records().colwise().mean();
    const Eigen::MatrixXd centered = batch.records().rowwise() - mean;
    // Classical samples commute: the symmetrized moment is the plain one.
    const Eigen::MatrixXd second = (centered.transpose() * centered) / nd;

    CovMatrix cov(4.0 * second);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
            const double fourth =
                (centered.col(i).array().square() * centered.col(j).array().square()).mean();
            const double var = std::max(fourth - second(i, j) * second(i, j), 0.0) / nd;
            cov.uncertainty(i, j) = cov.uncertainty(j, i) = 4.0 * std::sqrt(var);
        }
    }
    // Exact symmetry.
    cov.entries = 0.5 * (cov.entries + cov.entries.transpose()).eval();
    return cov;
}

CovMatrix subtract_background_scaled(const CovMatrix& sigma_on, const CovMatrix& sigma_off,
                                     double gain_scale) {
    if (sigma_on.dim() != sigma_off.dim()) {
        throw DimensionMismatch("pump ON is " + std::to_string(sigma_on.dim()) +
                                "-dimensional, pump OFF is " + std::to_string(sigma_off.dim()));
    }
    const int d = sigma_on.dim();
    CovMatrix out(gain_scale * (sigma_on.entries - sigma_off.entries) +
                  Eigen::MatrixXd::Identity(d, d));
    out.uncertainty = gain_scale * (sigma_on.uncertainty.array().square() +
                                    sigma_off.uncertainty.array().square())
                                       .sqrt()
                                       .matrix();
    return out;
}

CovMatrix subtract_background(const CovMatrix& sigma_on, const CovMatrix& sigma_off,
                              double gain_uncertainty_db) {
    CovMatrix out = subtract_background_scaled(sigma_on, sigma_off, 1.0);
    if (gain_uncertainty_db > 0.0) {
        const Eigen::MatrixXd diff = sigma_on.entries - sigma_off.entries;
        const double up = std::pow(10.0, gain_uncertainty_db / 10.0);
        const double down = 1.0 / up;
        out.systematic = (std::max(up - 1.0, 1.0 - down) * diff.array().abs()).matrix();
    }
    return out;
}

Squeezing squeezing_db(const CovMatrix& sigma) {
    if (sigma.dim() != 2) {
        throw DimensionMismatch("single-mode squeezing needs a 2x2 covariance");
    }
    const double vx = sigma.entries(0, 0);
    const double vp = sigma.entries(1, 1);
    if (!(vx > 0.0) || !(vp > 0.0)) {
        throw NonPositiveVariance("quadrature variance (" + std::to_string(vx) + ", " +
                                  std::to_string(vp) + ") is not positive");
    }
    return {10.0 * std::log10(vx), 10.0 * std::log10(vp)};
}

Negativity logarithmic_negativity(const CovMatrix& sigma) {
    if (sigma.dim() != 4) {
        throw DimensionMismatch("logarithmic negativity needs a 4x4 covariance");
    }
    const Eigen::MatrixXd& s = sigma.entries;
    const double det_a = s.block<2, 2>(0, 0).determinant();
    const double det_b = s.block<2, 2>(2, 2).determinant();
    const double det_c = s.block<2, 2>(0, 2).determinant();
    const double det_s = s.determinant();
    const double delta = det_a + det_b - 2.0 * det_c;

    double disc = delta * delta - 4.0 * det_s;
    const double scale = std::max({delta * delta, std::abs(4.0 * det_s), 1.0});
    if (disc < 0.0) {
        if (-disc > 1e-10 * scale) {
            throw ComplexEigenvalue(-disc, "Delta^2 - 4 det(sigma) = " + std::to_string(disc));
        }
        disc = 0.0;
    }
    // nu^2 = (Delta - sqrt(disc)) / 2, in cancellation-free form when Delta > 0.
    const double root = std::sqrt(disc);
    const double nu_sq = delta > 0.0 ? 2.0 * det_s / (delta + root) : 0.5 * (delta - root);
    if (nu_sq < 0.0) {
        throw ComplexEigenvalue(-nu_sq, "negative squared symplectic eigenvalue " +
                                            std::to_string(nu_sq));
    }
    Negativity out;
    out.nu_minus = std::sqrt(nu_sq);
    out.e_n = out.nu_minus < 1.0 ? -std::log(out.nu_minus) : 0.0;
    return out;
}

Eigen::MatrixXd symplectic_form(int dim) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
    for (int k = 0; k + 1 < dim; k += 2) {
        omega(k, k + 1) = 1.0;
        omega(k + 1, k) = -1.0;
    }
    return omega;
}

bool is_physical(const CovMatrix& sigma, double tol) {
    const int d = sigma.dim();
    const Eigen::MatrixXcd m = sigma.entries.cast<std::complex<double>>() +
                               std::complex<double>(0.0, 1.0) * symplectic_form(d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

QuadratureBatch sample_gaussian(const CovMatrix& target, const Eigen::VectorXd& means,
                                Eigen::Index n_rep, std::uint64_t seed, PumpState pump_state) {
    const int d = target.dim();
    if (means.size() != d) {
        throw DimensionMismatch("means must have one entry per quadrature");
    }
    if (n_rep < 1) {
        throw DegenerateBatch("n_rep must be positive");
    }
    const Eigen::MatrixXd quarter = 0.25 * target.entries;

    Eigen::MatrixXd factor;
    Eigen::LLT<Eigen::MatrixXd> llt(quarter);
    if (llt.info() == Eigen::Success) {
        factor = llt.matrixL();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(quarter);
        const Eigen::VectorXd ev = es.eigenvalues();
        const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
        if (ev.minCoeff() < -tol) {
            throw NotPSD("target has eigenvalue " + std::to_string(4.0 * ev.minCoeff()));
        }
        factor = es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd records(n_rep, d);
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < n_rep; ++i) {
        for (int k = 0; k < d; ++k) {
            z(k) = normal(rng);
        }
        records.row(i) = (means + factor * z).transpose();
    }
    std::vector<std::string> labels =
        d == 2 ? std::vector<std::string>{"signal"} : std::vector<std::string>{"signal", "idler"};
    return QuadratureBatch(std::move(labels), std::move(records), pump_state, true);
}

CovMatrix vacuum(int dim) { return CovMatrix(Eigen::MatrixXd::Identity(dim, dim)); }

CovMatrix squeezed_vacuum_db(double squeeze_db, double angle) {
    const double v = std::pow(10.0, -squeeze_db / 10.0);
    Eigen::Matrix2d rot;
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    const Eigen::Matrix2d diag = Eigen::Vector2d(v, 1.0 / v).asDiagonal();
    return CovMatrix(rot * diag * rot.transpose());
}

CovMatrix two_mode_squeezed(double r, double thermal_photons) {
    const double a = std::cosh(2.0 * r) + 2.0 * thermal_photons;
    const double c = std::sinh(2.0 * r);
    Eigen::Matrix4d m;
    m << a, 0, c, 0,
         0, a, 0, -c,
         c, 0, a, 0,
         0, -c, 0, a;
    return CovMatrix(m);
}

CovMatrix rotate_modes(const CovMatrix& sigma, double theta_1, double theta_2) {
    if (sigma.dim() != 4) {
        throw DimensionMismatch("mode rotation needs a 4x4 covariance");
    }
    Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
    s.block<2, 2>(0, 0) << std::cos(theta_1), -std::sin(theta_1), std::sin(theta_1), std::cos(theta_1);
    s.block<2, 2>(2, 2) << std::cos(theta_2), -std::sin(theta_2), std::sin(theta_2), std::cos(theta_2);
    CovMatrix out(s * sigma.entries * s.transpose());
    out.uncertainty = sigma.uncertainty;
    out.systematic = sigma.systematic;
    return out;
}

}  // namespace twpa::gaussian
