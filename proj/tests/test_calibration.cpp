#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "twpa/calibration.hpp"
#include "twpa/chain.hpp"
#include "twpa/constants.hpp"
#include "twpa/errors.hpp"
#include "twpa/gaussian.hpp"
#include "twpa/snail.hpp"
#include "twpa/sweeps.hpp"

using namespace twpa::calibration;
using Catch::Approx;
namespace k = twpa::constants;

namespace {

constexpr double kFp = 7.705e9;

SntjModel reference_model(double f = kFp / 2.0, double g_db = 61.7) {
    SntjModel m;
    m.frequency = f;
    m.bandwidth = 1e6;
    m.t_electron = 0.05;
    m.t_sys = 4.0;
    m.g_sys = db_to_linear(g_db);
    return m;
}

SntjModel rough_guess() {
    SntjModel g;
    g.frequency = kFp / 2.0;
    g.bandwidth = 1e6;
    g.g_sys = db_to_linear(60.0);
    g.t_sys = 3.0;
    g.t_electron = 0.1;
    return g;
}

}  // namespace

TEST_CASE("SNTJ noise is linear in bias far above the knee", "[calibration]") {
    const SntjModel m = reference_model();
    const double v = 300e-6;
    const double dv = 1e-6;
    const double slope = (sntj_noise_power(m, v + dv) - sntj_noise_power(m, v - dv)) / (2.0 * dv);
    // P -> (eV / 2k + T_sys) BW G k, so dP/dV = e BW G / 2.
    CHECK(slope == Approx(k::elementary_charge * m.bandwidth * m.g_sys / 2.0).epsilon(1e-9));
    const double asymptote = (k::elementary_charge * v / (2.0 * k::boltzmann) + m.t_sys) *
                             m.bandwidth * m.g_sys * k::boltzmann;
    CHECK(sntj_noise_power(m, v) == Approx(asymptote).epsilon(1e-12));
}

TEST_CASE("SNTJ noise is even in bias", "[calibration][property]") {
    const SntjModel m = reference_model();
    for (int i = 0; i <= 1000; ++i) {
        const double v = -400e-6 + 800e-6 * i / 1000.0;
        CHECK(sntj_noise_power(m, v) == sntj_noise_power(m, -v));
    }
}

TEST_CASE("SNTJ noise at zero bias", "[calibration]") {
    SntjModel cold = reference_model();
    cold.t_electron = 1e-3;
    // hf >> kT: the zero-bias floor is the half photon hf / 2k.
    const double floor = (k::planck * cold.frequency / (2.0 * k::boltzmann) + cold.t_sys) *
                         cold.bandwidth * cold.g_sys * k::boltzmann;
    CHECK(sntj_noise_power(cold, 0.0) == Approx(floor).epsilon(1e-12));
    CHECK_FALSE(cold.quantum_regime_warning());

    SntjModel hot = reference_model(1e3);
    hot.t_electron = 1.0;
    // hf << kT: Johnson noise at the electron temperature.
    CHECK(sntj_noise_power(hot, 0.0) ==
          Approx((1.0 + hot.t_sys) * hot.bandwidth * hot.g_sys * k::boltzmann).epsilon(1e-12));
    CHECK(hot.quantum_regime_warning());
}

TEST_CASE("SNTJ model rejects non-positive parameters", "[calibration]") {
    SntjModel m = reference_model();
    m.t_sys = 0.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    CHECK_THROWS_AS(sntj_noise_power(m, 0.0), std::invalid_argument);
}

TEST_CASE("noiseless SNTJ data are fitted exactly", "[calibration]") {
    const SntjModel truth = reference_model();
    const SntjDataset d = synthetic_sntj(truth, 400e-6, 401, 0.0, 1);
    const FitResult r = fit_sntj(d, truth.frequency, truth.bandwidth, rough_guess());
    CHECK(r.converged);
    CHECK(r.model.g_sys == Approx(truth.g_sys).epsilon(1e-8));
    CHECK(r.model.t_sys == Approx(truth.t_sys).epsilon(1e-8));
    CHECK(r.model.t_electron == Approx(truth.t_electron).epsilon(1e-6));
}

TEST_CASE("SNTJ fit at 61.7 dB with 1% noise", "[calibration]") {
    const SntjModel truth = reference_model();
    const SntjDataset d = synthetic_sntj(truth, 400e-6, 100001, 0.01, 7);
    const FitResult r = fit_sntj(d, truth.frequency, truth.bandwidth, rough_guess());
    CHECK(r.model.g_sys_db() == Approx(61.7).margin(0.1));
    CHECK(r.model.t_sys == Approx(4.0).epsilon(0.1));
    CHECK(r.model.t_electron == Approx(0.05).epsilon(0.1));
    // Reported error is consistent with the actual miss.
    CHECK(std::abs(r.model.g_sys_db() - 61.7) < 5.0 * r.g_sys_db_error);
    CHECK(r.g_sys_db_error < 0.01);
}

TEST_CASE("SNTJ fit recovers every calibration frequency", "[calibration]") {
    const double offsets[] = {0.0, 31e6, -31e6, 61e6, -61e6, kFp / 2.0 + 31e6};
    const double gains[] = {61.7, 62.0, 61.1, 61.5, 62.0, 46.5};
    for (int i = 0; i < 6; ++i) {
        const SntjModel truth = reference_model(kFp / 2.0 + offsets[i], gains[i]);
        const SntjDataset d = synthetic_sntj(truth, 400e-6, 100001, 0.01, 100 + static_cast<unsigned>(i));
        SntjModel guess = rough_guess();
        guess.g_sys = db_to_linear(gains[i] - 2.0);
        const FitResult r = fit_sntj(d, truth.frequency, truth.bandwidth, guess);
        CHECK(r.model.g_sys_db() == Approx(gains[i]).margin(0.05));
        CHECK(r.model.t_sys == Approx(4.0).epsilon(0.1));
    }
}

TEST_CASE("SNTJ gain estimate is unbiased", "[calibration][property]") {
    const SntjModel truth = reference_model();
    double sum = 0.0;
    const int n = 100;
    for (int i = 0; i < n; ++i) {
        const SntjDataset d = synthetic_sntj(truth, 400e-6, 20001, 0.01, 1000 + static_cast<unsigned>(i));
        sum += fit_sntj(d, truth.frequency, truth.bandwidth, rough_guess()).model.g_sys_db();
    }
    CHECK(sum / n == Approx(61.7).margin(0.02));
}

TEST_CASE("SNTJ fit refuses ill-conditioned data", "[calibration]") {
    const SntjModel truth = reference_model();
    const SntjDataset few = synthetic_sntj(truth, 400e-6, 9, 0.0, 1);
    CHECK_THROWS_AS(fit_sntj(few, truth.frequency, truth.bandwidth, rough_guess()), twpa::IllConditioned);
    // 2 h f / e at 3.85 GHz is about 32 uV.
    const SntjDataset narrow = synthetic_sntj(truth, 20e-6, 101, 0.0, 1);
    CHECK_THROWS_AS(fit_sntj(narrow, truth.frequency, truth.bandwidth, rough_guess()),
                    twpa::IllConditioned);
    SntjDataset mismatched = synthetic_sntj(truth, 400e-6, 101, 0.0, 1);
    mismatched.psd.pop_back();
    CHECK_THROWS_AS(fit_sntj(mismatched, truth.frequency, truth.bandwidth, rough_guess()),
                    std::invalid_argument);
}

TEST_CASE("synthetic SNTJ data are seeded and symmetric", "[calibration]") {
    const SntjModel truth = reference_model();
    const SntjDataset a = synthetic_sntj(truth, 400e-6, 11, 0.01, 3);
    const SntjDataset b = synthetic_sntj(truth, 400e-6, 11, 0.01, 3);
    CHECK(a.psd == b.psd);
    CHECK(a.v_bias.front() == -400e-6);
    CHECK(a.v_bias.back() == 400e-6);
    CHECK(a.v_bias[5] == 0.0);
}

TEST_CASE("SNTJ CSV groups rows by frequency", "[calibration]") {
    std::istringstream in(
        "# bias sweep\n"
        "v_bias,psd,frequency\n"
        "-1e-4,2.0,3e9\n"
        "1e-4,2.0,3e9\n"
        "0,1.0,4e9\n");
    const auto series = read_sntj_csv(in, 1.0);
    REQUIRE(series.size() == 2);
    CHECK(series[0].frequency == 3e9);
    CHECK(series[0].data.v_bias.size() == 2);
    CHECK(series[1].data.psd[0] == 1.0);

    std::istringstream plain("v_bias,psd\n0,1\n");
    CHECK(read_sntj_csv(plain, 5e9).front().frequency == 5e9);
    std::istringstream bad("bias,psd\n0,1\n");
    CHECK_THROWS_AS(read_sntj_csv(bad, 5e9), twpa::FormatError);
    std::istringstream junk("v_bias,psd\n0,x\n");
    CHECK_THROWS_AS(read_sntj_csv(junk, 5e9), twpa::FormatError);
}

TEST_CASE("normalization factor from a hand calculation", "[calibration]") {
    NormalizationParams p;
    p.eta = 0.9;
    p.g_sys = db_to_linear(61.7);
    p.f_acq = kFp / 2.0;
    // 0.98 sqrt(0.9 * 10 us / (10^6.27 * 50 ohm * h * 3.8525 GHz))
    CHECK(normalization_factor(p) == Approx(190705.39963206803).epsilon(1e-12));
    CHECK(p.corrected_gain() == Approx(db_to_linear(62.7)).epsilon(1e-14));
}

TEST_CASE("normalization factor scaling laws", "[calibration][property]") {
    NormalizationParams p;
    p.eta = 0.94;
    p.g_sys = db_to_linear(61.7);
    p.f_acq = kFp / 2.0;
    const double u0 = normalization_factor(p);
    NormalizationParams q = p;
    q.t_int *= 2.0;
    CHECK(normalization_factor(q) / u0 == Approx(std::sqrt(2.0)).epsilon(1e-14));
    q = p;
    q.g_sys *= 10.0;
    CHECK(normalization_factor(q) / u0 == Approx(std::pow(10.0, -0.5)).epsilon(1e-14));
    q = p;
    q.eta = 0.0;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    CHECK_THROWS_AS(normalization_factor(q), std::invalid_argument);
}

TEST_CASE("raising the assumed gain never increases squeezing", "[calibration][property]") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        // Pump-on and pump-off covariances in raw units.
        const double off = 1.0 + 5.0 * u(rng);
        const double squeeze = 0.3 + 0.69 * u(rng);  // true variance below vacuum
        twpa::gaussian::CovMatrix sigma_off(Eigen::Matrix2d::Identity() * off);
        twpa::gaussian::CovMatrix sigma_on(
            Eigen::Matrix2d{{off + squeeze - 1.0, 0.0}, {0.0, off + 1.0 / squeeze - 1.0}});
        double last = 0.0;
        for (double db = -1.0; db <= 1.0 + 1e-12; db += 0.1) {
            // A gain assumed 10^(db/10) times higher shrinks upsilon^2 by the same factor.
            const auto s = twpa::gaussian::subtract_background_scaled(sigma_on, sigma_off,
                                                                      db_to_linear(-db));
            const double magnitude = -10.0 * std::log10(s.entries(0, 0));
            REQUIRE(std::isfinite(magnitude));
            if (db > -1.0) {
                CHECK(magnitude <= last + 1e-12);
            }
            last = magnitude;
        }
    }
}

TEST_CASE("input attenuation ledger", "[calibration]") {
    const AttenuationLedger a = input_attenuation(0.0, -0.26, 61.7);
    CHECK(a.a_in_db == Approx(-61.44).margin(1e-12));
    CHECK(input_attenuation(-3.0, -1.0, 40.0).a_in_db == Approx(-42.0).margin(1e-12));
}

TEST_CASE("propagation constant satisfies the ladder dispersion", "[calibration]") {
    const LadderCell cell{0.38e-9, 50e-15, 250e-15};
    for (double f : {1e9, 3.85e9, 7.7e9}) {
        for (double tan_delta : {0.0, 2.1e-3, 1e-2}) {
            const std::complex<double> g = propagation_constant(cell, tan_delta, f);
            const double w = k::two_pi * f;
            const std::complex<double> j(0.0, 1.0);
            const std::complex<double> z = 1.0 / (1.0 / (j * w * cell.inductance) + j * w * cell.c_j);
            const std::complex<double> y = j * w * cell.c_g / (1.0 + j * tan_delta);
            CHECK(std::abs(std::cosh(g) - (1.0 + z * y / 2.0)) < 1e-12);
            CHECK(g.real() >= 0.0);
            if (tan_delta == 0.0) {
                CHECK(g.real() < 1e-7);
            }
        }
    }
}

TEST_CASE("insertion loss grows with loss tangent and length", "[calibration][property]") {
    const LadderCell cell{0.38e-9, 50e-15, 250e-15};
    CHECK(insertion_loss_from_tan_delta(0.0, 700, 3.85e9, cell) == 1.0);
    double last = 1.0;
    for (double t = 1e-4; t < 2e-2; t *= 1.5) {
        const double eta = insertion_loss_from_tan_delta(t, 700, 3.85e9, cell);
        CHECK(eta < last);
        CHECK(eta > 0.0);
        last = eta;
    }
    const double full = insertion_loss_from_tan_delta(2.1e-3, 700, 3.85e9, cell);
    const double half = insertion_loss_from_tan_delta(2.1e-3, 700, 3.85e9, cell, 0.5);
    CHECK(half == Approx(std::sqrt(full)).epsilon(1e-14));
    CHECK(insertion_loss_from_tan_delta(2.1e-3, 350, 3.85e9, cell) == Approx(half).epsilon(1e-14));
}

TEST_CASE("insertion loss matches the simulated transmission deficit", "[calibration][oracle]") {
    using namespace twpa::circuit;
    ChainConfig lossy;
    lossy.n_cells = 100;
    lossy.disorder_amplitude = 0.0;
    ChainConfig lossless = lossy;
    lossless.tan_delta = 0.0;
    const double flux = 0.59;
    DriveSpec base;
    base.settle_time = 30e-9;
    base.ramp_time = 5e-9;
    const Tone tone{kFp / 2.0, 0.0011e-6, 0.0};
    const double deficit = transmission_db(lossy, flux, tone, base) - transmission_db(lossless, flux, tone, base);

    const Chain chain = build_chain(lossy, flux, kFp / 2.0);
    const auto c = twpa::snail::coefficients(chain.cells[0].snail);
    const LadderCell cell{c.inductance, lossy.c_j, lossy.c_g};
    const double eta = insertion_loss_from_tan_delta(lossy.tan_delta, lossy.n_cells, kFp / 2.0, cell);
    CHECK(deficit < 0.0);
    CHECK(deficit == Approx(linear_to_db(eta)).margin(0.2));
}
