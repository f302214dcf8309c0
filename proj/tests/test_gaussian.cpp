#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "twpa/errors.hpp"
#include "twpa/gaussian.hpp"

using namespace twpa::gaussian;
using Catch::Approx;

namespace {

// Brute force: symplectic spectrum of the partial transpose as the moduli of
// the eigenvalues of i Omega sigma~, without any closed form.
double nu_minus_brute_force(const Eigen::MatrixXd& sigma) {
    Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
    t(3, 3) = -1.0;  // p_2 -> -p_2
    const Eigen::Matrix4d pt = t * sigma * t;
    const Eigen::Matrix4cd m = std::complex<double>(0.0, 1.0) * symplectic_form(4) * pt;
    const Eigen::Vector4cd ev = Eigen::ComplexEigenSolver<Eigen::Matrix4cd>(m).eigenvalues();
    return ev.cwiseAbs().minCoeff();
}

double e_n_brute_force(const Eigen::MatrixXd& sigma) {
    return std::max(0.0, -std::log(nu_minus_brute_force(sigma)));
}

// Random physical two-mode state: symplectic congruence of a thermal state.
Eigen::Matrix4d random_physical_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto single_squeeze = [&](int mode, double r) {
        Eigen::Matrix4d s = Eigen::Matrix4d::Identity();
        s(2 * mode, 2 * mode) = std::exp(-r);
        s(2 * mode + 1, 2 * mode + 1) = std::exp(r);
        return s;
    };
    auto rotation = [&](int mode, double th) {
        Eigen::Matrix4d s = Eigen::Matrix4d::Identity();
        s.block<2, 2>(2 * mode, 2 * mode) << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        return s;
    };
    auto beam_splitter = [&](double th) {
        const double c = std::cos(th);
        const double s = std::sin(th);
        Eigen::Matrix4d b;
        b << c, 0, s, 0,
             0, c, 0, s,
             -s, 0, c, 0,
             0, -s, 0, c;
        return b;
    };
    Eigen::Matrix4d s = rotation(0, 6.3 * u(rng)) * single_squeeze(0, u(rng)) *
                        beam_splitter(1.6 * u(rng)) * rotation(1, 6.3 * u(rng)) *
                        single_squeeze(1, u(rng)) * beam_splitter(1.6 * u(rng));
    Eigen::Matrix4d thermal = Eigen::Matrix4d::Zero();
    const double n1 = 1.0 + 0.5 * u(rng);
    const double n2 = 1.0 + 0.5 * u(rng);
    thermal.diagonal() << n1, n1, n2, n2;
    return s * thermal * s.transpose();
}

}  // namespace

TEST_CASE("vacuum samples estimate the identity", "[gaussian]") {
    const QuadratureBatch b = sample_gaussian(vacuum(2), Eigen::Vector2d::Zero(), 200000, 11);
    const CovMatrix c = estimate_covariance(b);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            CHECK(std::abs(c.entries(i, j) - (i == j ? 1.0 : 0.0)) < 4.0 * c.uncertainty(i, j));
        }
    }
    // Each quadrature of vacuum has variance 1/4.
    CHECK(b.records().col(0).squaredNorm() / 200000.0 == Approx(0.25).epsilon(0.02));
}

TEST_CASE("constant records give a zero covariance", "[gaussian]") {
    Eigen::MatrixXd rec = Eigen::MatrixXd::Constant(50, 2, 0.7);
    const CovMatrix c = estimate_covariance(QuadratureBatch({"signal"}, rec, PumpState::On, true));
    CHECK(c.entries.isZero(0.0));
    CHECK(c.uncertainty.isZero(0.0));
}

TEST_CASE("hand-computed covariance of a tiny batch", "[gaussian]") {
    // x = (1, -1), p = (1, -1): <x^2> = <p^2> = <xp> = 1, so sigma = 4 [[1, 1], [1, 1]].
    Eigen::MatrixXd rec(2, 2);
    rec << 1.0, 1.0, -1.0, -1.0;
    const CovMatrix c = estimate_covariance(QuadratureBatch({"signal"}, rec, PumpState::On, true));
    CHECK(c.entries(0, 0) == 4.0);
    CHECK(c.entries(0, 1) == 4.0);
    CHECK(c.entries(1, 1) == 4.0);
}

TEST_CASE("two-mode covariance round trip within four standard errors", "[gaussian][property]") {
    const CovMatrix target = rotate_modes(two_mode_squeezed(0.4, 0.3), 0.2, -0.7);
    Eigen::Vector4d means(0.1, -0.3, 0.0, 2.0);
    const QuadratureBatch b = sample_gaussian(target, means, 200000, 3);
    const CovMatrix c = estimate_covariance(b);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            CHECK(std::abs(c.entries(i, j) - target.entries(i, j)) <= 4.0 * c.uncertainty(i, j));
            CHECK(c.entries(i, j) == c.entries(j, i));
        }
    }
}

TEST_CASE("background subtraction identities", "[gaussian]") {
    const CovMatrix s = two_mode_squeezed(0.3);
    const CovMatrix same = subtract_background(s, s);
    CHECK(same.entries.isApprox(Eigen::Matrix4d::Identity(), 0.0));

    const CovMatrix noisy(3.0 * Eigen::Matrix4d::Identity());
    CovMatrix on(noisy.entries + s.entries - Eigen::Matrix4d::Identity());
    const CovMatrix out = subtract_background(on, noisy);
    CHECK((out.entries - s.entries).cwiseAbs().maxCoeff() < 1e-14);

    CovMatrix a(Eigen::Matrix2d::Identity() * 2.0);
    CovMatrix b(Eigen::Matrix2d::Identity());
    a.uncertainty.setConstant(0.3);
    b.uncertainty.setConstant(0.4);
    const CovMatrix d = subtract_background(a, b, 1.0);
    CHECK(d.entries(0, 0) == 2.0);
    CHECK(d.uncertainty(0, 0) == Approx(0.5).epsilon(1e-15));
    CHECK(d.systematic(0, 0) == Approx(std::pow(10.0, 0.1) - 1.0).epsilon(1e-14));
    CHECK(d.systematic(0, 1) == 0.0);

    CHECK_THROWS_AS(subtract_background(vacuum(2), vacuum(4)), twpa::DimensionMismatch);
}

TEST_CASE("scaled subtraction is the subtraction of scaled inputs", "[gaussian]") {
    const CovMatrix on(Eigen::Matrix2d{{5.0, 0.5}, {0.5, 9.0}});
    const CovMatrix off(Eigen::Matrix2d{{4.0, 0.0}, {0.0, 4.0}});
    const CovMatrix a = subtract_background_scaled(on, off, 0.8);
    const CovMatrix b = subtract_background(CovMatrix(0.8 * on.entries), CovMatrix(0.8 * off.entries));
    CHECK((a.entries - b.entries).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("squeezing in dB relative to vacuum", "[gaussian]") {
    CHECK(squeezing_db(vacuum(2)).s_x_db == 0.0);
    const Squeezing s = squeezing_db(CovMatrix(Eigen::Matrix2d{{0.5, 0.0}, {0.0, 2.0}}));
    CHECK(s.s_x_db == Approx(-3.0103).margin(1e-4));
    CHECK(s.s_p_db == Approx(3.0103).margin(1e-4));
    const Squeezing t = squeezing_db(squeezed_vacuum_db(6.0));
    CHECK(t.s_x_db == Approx(-6.0).margin(1e-12));
    CHECK(t.s_p_db == Approx(6.0).margin(1e-12));
    CHECK_THROWS_AS(squeezing_db(CovMatrix(Eigen::Matrix2d{{0.0, 0.0}, {0.0, 1.0}})),
                    twpa::NonPositiveVariance);
    CHECK_THROWS_AS(squeezing_db(CovMatrix(Eigen::Matrix2d{{1.0, 0.0}, {0.0, -0.2}})),
                    twpa::NonPositiveVariance);
    CHECK_THROWS_AS(squeezing_db(vacuum(4)), twpa::DimensionMismatch);
}

TEST_CASE("two-mode squeezed vacuum has E_N = 2r", "[gaussian][oracle]") {
    for (double r : {0.1, 0.5, 1.0}) {
        const CovMatrix s = two_mode_squeezed(r);
        const Negativity n = logarithmic_negativity(s);
        CHECK(n.e_n == Approx(2.0 * r).margin(1e-9));
        CHECK(n.nu_minus == Approx(std::exp(-2.0 * r)).epsilon(1e-9));
        CHECK(e_n_brute_force(s.entries) == Approx(2.0 * r).margin(1e-9));
    }
    const Negativity id = logarithmic_negativity(vacuum(4));
    CHECK(id.e_n == 0.0);
    CHECK(id.nu_minus == 1.0);
}

TEST_CASE("E_N grows monotonically with squeezing", "[gaussian][property]") {
    double last = -1.0;
    for (int i = 0; i < 50; ++i) {
        const double r = 2.0 * i / 49.0;
        const double e = logarithmic_negativity(two_mode_squeezed(r)).e_n;
        CHECK(e > last);
        last = e;
    }
}

TEST_CASE("E_N is invariant under local rotations", "[gaussian][property]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.2, 3.2);
    const CovMatrix s = two_mode_squeezed(0.7, 0.2);
    const double e0 = logarithmic_negativity(s).e_n;
    for (int i = 0; i < 50; ++i) {
        const CovMatrix r = rotate_modes(s, u(rng), u(rng));
        CHECK(logarithmic_negativity(r).e_n == Approx(e0).margin(1e-12));
    }
}

TEST_CASE("closed form agrees with brute force on random physical states", "[gaussian][property]") {
    std::mt19937_64 rng(17);
    int entangled = 0;
    for (int i = 0; i < 200; ++i) {
        const Eigen::Matrix4d m = random_physical_state(rng);
        const CovMatrix s(m);
        REQUIRE(is_physical(s));
        const Negativity n = logarithmic_negativity(s);
        CHECK(n.nu_minus == Approx(nu_minus_brute_force(m)).epsilon(1e-9));
        CHECK(n.e_n == Approx(e_n_brute_force(m)).margin(1e-9));
        // PPT: entangled exactly when the transposed spectrum dips below 1.
        CHECK((n.e_n > 0.0) == (nu_minus_brute_force(m) < 1.0));
        entangled += n.e_n > 0.0;
    }
    CHECK(entangled > 10);
    CHECK(entangled < 190);
}

TEST_CASE("unphysical inputs are flagged", "[gaussian]") {
    CHECK_FALSE(is_physical(CovMatrix(Eigen::Matrix2d{{0.5, 0.0}, {0.0, 0.5}})));
    CHECK(is_physical(squeezed_vacuum_db(10.0, 0.3)));

    // Negative definite 4x4 matrix: Delta^2 < 4 det sigma.
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(0, 2) = m(2, 0) = 3.0;
    m(1, 3) = m(3, 1) = 3.0;
    try {
        (void)logarithmic_negativity(CovMatrix(m));
        FAIL("expected ComplexEigenvalue");
    } catch (const twpa::ComplexEigenvalue& e) {
        CHECK(e.violation() > 0.0);
    }
    CHECK_THROWS_AS(logarithmic_negativity(vacuum(2)), twpa::DimensionMismatch);
}

TEST_CASE("sampler rejects non-PSD targets and is deterministic", "[gaussian]") {
    CHECK_THROWS_AS(sample_gaussian(CovMatrix(Eigen::Matrix2d{{1.0, 2.0}, {2.0, 1.0}}),
                                    Eigen::Vector2d::Zero(), 10, 1),
                    twpa::NotPSD);
    // Semidefinite target goes through the eigen path.
    const QuadratureBatch z = sample_gaussian(CovMatrix(Eigen::Matrix2d{{1.0, 1.0}, {1.0, 1.0}}),
                                              Eigen::Vector2d::Zero(), 100, 1);
    CHECK((z.records().col(0) - z.records().col(1)).cwiseAbs().maxCoeff() < 1e-12);

    const auto a = sample_gaussian(two_mode_squeezed(0.5), Eigen::Vector4d::Zero(), 1000, 9);
    const auto b = sample_gaussian(two_mode_squeezed(0.5), Eigen::Vector4d::Zero(), 1000, 9);
    const auto c = sample_gaussian(two_mode_squeezed(0.5), Eigen::Vector4d::Zero(), 1000, 10);
    CHECK(a.records() == b.records());
    CHECK(a.records() != c.records());
}

TEST_CASE("estimation preconditions", "[gaussian]") {
    Eigen::MatrixXd rec = Eigen::MatrixXd::Ones(10, 2);
    CHECK_THROWS_AS(estimate_covariance(QuadratureBatch({"signal"}, rec, PumpState::On, false)),
                    twpa::NotNormalized);
    CHECK_THROWS_AS(estimate_covariance(QuadratureBatch({"signal"}, Eigen::MatrixXd::Ones(1, 2),
                                                        PumpState::On, true)),
                    twpa::DegenerateBatch);
    const QuadratureBatch raw({"signal"}, 0.01 * rec, PumpState::Off, false);
    const QuadratureBatch n = raw.normalized_by(100.0);
    CHECK(n.normalized());
    CHECK(n.records().isApprox(rec));
    CHECK(to_string(PumpState::On) == "ON");
    CHECK(pump_state_from_string("OFF") == PumpState::Off);
    CHECK_THROWS_AS(pump_state_from_string("on?"), twpa::FormatError);
}
