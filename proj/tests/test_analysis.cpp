#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nvmech/analysis.hpp"
#include "nvmech/rng.hpp"
#include "nvmech/units.hpp"
#include "oracles.hpp"

using namespace nvmech;
using Catch::Approx;

namespace {

SignalTrace synth(const RamseyModel& m, double stop_us, int n, double noise_sigma = 0.0,
                  std::uint64_t seed = 0) {
    SignalTrace t;
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        const double us = stop_us * i / (n - 1);
        t.abscissa.push_back(units::us_to_s(us));
        double v = ramsey_model_eval(m, units::us_to_s(us));
        if (noise_sigma > 0.0) v += noise_sigma * rng.normal();
        t.mean.push_back(v);
        t.stderr_.push_back(noise_sigma);
    }
    return t;
}

} // namespace

TEST_CASE("Ramsey model evaluation") {
    RamseyModel m;
    m.kind = RamseyModelKind::SingleQuantum;
    m.t2_star = 0.91e-6;
    m.delta = units::khz_to_rad_s(350.0);
    m.amplitude = {0.2, 0.5, 0.3};
    m.phase = {0.1, -0.2, 0.4};

    // t = 0 value is the phase-weighted amplitude sum
    double want0 = 0.0;
    for (int i = 0; i < 3; ++i) want0 += m.amplitude[i] * std::cos(m.phase[i]);
    CHECK(ramsey_model_eval(m, 0.0) == Approx(want0).epsilon(1e-15));

    // envelope drops to 1/e at T2* (isolated by a frequency-free variant)
    RamseyModel flat;
    flat.kind = RamseyModelKind::Mechanical;
    flat.t2_star = 0.45e-6;
    flat.omega_rot = units::mhz_to_rad_s(0.5);
    flat.delta = -flat.omega_rot; // cancels the oscillation
    flat.amplitude = {1.0, 0, 0};
    CHECK(ramsey_model_eval(flat, flat.t2_star) ==
          Approx(std::exp(-1.0)).epsilon(1e-12));

    // 3.5 MHz rotation plus 0.83 MHz detuning oscillates at 4.33 MHz
    RamseyModel mech;
    mech.kind = RamseyModelKind::Mechanical;
    mech.t2_star = 0.45e-6;
    mech.delta = units::khz_to_rad_s(830.0);
    mech.omega_rot = units::mhz_to_rad_s(3.5);
    mech.amplitude = {1.0, 0, 0};
    for (double t_us : {0.11, 0.31, 0.62}) {
        const double t = units::us_to_s(t_us);
        const double want =
            std::exp(-t / mech.t2_star) * std::cos(units::mhz_to_rad_s(4.33) * t);
        CHECK(ramsey_model_eval(mech, t) == Approx(want).epsilon(1e-9));
    }

    CHECK_THROWS_AS(
        ramsey_model_eval(RamseyModel{.kind = RamseyModelKind::SingleQuantum,
                                      .t2_star = -1.0},
                          0.1),
        InvalidParameterError);
}

TEST_CASE("analytic Jacobian of the fit residuals matches finite differences") {
    RamseyModel proto;
    proto.kind = RamseyModelKind::SingleQuantum;
    std::vector<double> t, y;
    for (int i = 0; i < 40; ++i) {
        t.push_back(units::us_to_s(0.1 * i));
        y.push_back(0.0);
    }
    Eigen::VectorXd x(8);
    x << 0.8e-6, units::khz_to_rad_s(300.0), 0.3, 0.35, 0.25, 0.1, -0.3, 0.2;

    Eigen::VectorXd r(t.size());
    Eigen::MatrixXd jac(t.size(), 8);
    detail::ramsey_residuals(proto, t, y, x, r, jac);

    auto model = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd rr(t.size());
        Eigen::MatrixXd jj(t.size(), 8);
        detail::ramsey_residuals(proto, t, y, p, rr, jj);
        return rr;
    };
    const Eigen::MatrixXd fd = oracle::fd_jacobian(model, x, 1e-7);
    // columns live on wildly different scales; compare column-normalized
    for (int c = 0; c < 8; ++c) {
        const double scale = std::max(fd.col(c).cwiseAbs().maxCoeff(), 1e-12);
        CHECK((jac.col(c) - fd.col(c)).cwiseAbs().maxCoeff() / scale < 1e-6);
    }
}

TEST_CASE("noiseless self-generated data is recovered to 1e-6") {
    RamseyModel truth;
    truth.kind = RamseyModelKind::SingleQuantum;
    truth.t2_star = 0.91e-6;
    truth.delta = units::khz_to_rad_s(350.0);
    truth.amplitude = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    truth.phase = {0.05, -0.1, 0.15};
    const SignalTrace data = synth(truth, 4.0, 600);

    const FitResult fit = fit_ramsey(data, RamseyModelKind::SingleQuantum);
    CHECK(fit.converged);
    CHECK(fit.model.t2_star == Approx(truth.t2_star).epsilon(1e-6));
    CHECK(fit.model.delta == Approx(truth.delta).epsilon(1e-6));
    for (int i = 0; i < 3; ++i)
        CHECK(fit.model.amplitude[i] == Approx(truth.amplitude[i]).epsilon(1e-5));
}

TEST_CASE("mechanical model with noise recovers T2* within ten percent") {
    RamseyModel truth;
    truth.kind = RamseyModelKind::Mechanical;
    truth.t2_star = 0.45e-6;
    truth.delta = units::khz_to_rad_s(830.0);
    truth.omega_rot = units::mhz_to_rad_s(3.5);
    truth.amplitude = {1.0, 0, 0};
    truth.phase = {0.2, 0, 0};

    FitOptions opt;
    opt.omega_rot = truth.omega_rot;
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const SignalTrace data = synth(truth, 3.0, 900, 0.02, seed);
        const FitResult fit = fit_ramsey(data, RamseyModelKind::Mechanical, opt);
        if (std::abs(fit.model.t2_star - truth.t2_star) / truth.t2_star <= 0.10) ++ok;
    }
    CHECK(ok >= 4);
}

TEST_CASE("degenerate inputs raise errors") {
    SignalTrace flat;
    for (int i = 0; i < 200; ++i) {
        flat.abscissa.push_back(units::us_to_s(0.01 * i));
        flat.mean.push_back(0.0);
        flat.stderr_.push_back(0.0);
    }
    CHECK_THROWS_AS(fit_ramsey(flat, RamseyModelKind::SingleQuantum), NumericalError);

    SignalTrace tiny;
    for (int i = 0; i < 8; ++i) {
        tiny.abscissa.push_back(units::us_to_s(0.1 * i));
        tiny.mean.push_back(std::sin(i));
        tiny.stderr_.push_back(0.0);
    }
    CHECK_THROWS_AS(fit_ramsey(tiny, RamseyModelKind::SingleQuantum),
                    InvalidParameterError);
}

TEST_CASE("reported uncertainty tracks the empirical scatter") {
    RamseyModel truth;
    truth.kind = RamseyModelKind::SingleQuantum;
    truth.t2_star = 0.91e-6;
    truth.delta = units::khz_to_rad_s(350.0);
    truth.amplitude = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    truth.phase = {0.0, 0.0, 0.0};

    FitOptions opt;
    opt.delta_scan_points = 48;
    opt.t2_scan_points = 12;
    std::vector<double> estimates, reported;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const SignalTrace data = synth(truth, 4.0, 240, 0.02, seed);
        const FitResult fit = fit_ramsey(data, RamseyModelKind::SingleQuantum, opt);
        estimates.push_back(fit.model.t2_star);
        reported.push_back(fit.sigma_t2());
    }
    double mean = 0.0;
    for (double v : estimates) mean += v;
    mean /= estimates.size();
    double var = 0.0;
    for (double v : estimates) var += (v - mean) * (v - mean);
    const double empirical = std::sqrt(var / (estimates.size() - 1));
    double mean_reported = 0.0;
    for (double v : reported) mean_reported += v;
    mean_reported /= reported.size();
    CHECK(empirical == Approx(mean_reported).epsilon(0.30));
}

TEST_CASE("power spectrum") {
    SECTION("a pure cosine peaks at its frequency within one natural bin") {
        SignalTrace t;
        const double f = 1.7e6; // Hz
        const int n = 400;
        const double dt = 5e-9;
        for (int i = 0; i < n; ++i) {
            t.abscissa.push_back(dt * i);
            t.mean.push_back(std::cos(units::two_pi * f * dt * i));
            t.stderr_.push_back(0.0);
        }
        const PowerSpectrum ps = power_spectrum(t);
        const auto peaks = find_peaks(ps);
        REQUIRE_FALSE(peaks.empty());
        std::size_t best = peaks[0];
        for (std::size_t k : peaks)
            if (ps.power[k] > ps.power[best]) best = k;
        CHECK(std::abs(ps.freq_hz[best] - f) <= 1.0 / (dt * n));

        // scaling the trace moves the power, not the peak
        SignalTrace scaled = t;
        for (auto& v : scaled.mean) v *= 7.3;
        const PowerSpectrum ps2 = power_spectrum(scaled);
        const auto peaks2 = find_peaks(ps2);
        REQUIRE_FALSE(peaks2.empty());
        std::size_t best2 = peaks2[0];
        for (std::size_t k : peaks2)
            if (ps2.power[k] > ps2.power[best2]) best2 = k;
        CHECK(best2 == best);
    }

    SECTION("Parseval consistency") {
        SignalTrace t;
        Rng rng(3);
        for (int i = 0; i < 257; ++i) {
            t.abscissa.push_back(1e-8 * i);
            t.mean.push_back(rng.normal());
            t.stderr_.push_back(0.0);
        }
        const PowerSpectrum ps = power_spectrum(t, SpectrumWindow::Hann, 4);
        double acc = ps.power.front() + ps.power.back();
        for (std::size_t k = 1; k + 1 < ps.power.size(); ++k) acc += 2.0 * ps.power[k];
        CHECK(acc / static_cast<double>(ps.n_padded) ==
              Approx(ps.windowed_energy).epsilon(1e-9));
    }

    SECTION("non-uniform grids are rejected") {
        SignalTrace t;
        t.abscissa = {0.0, 1e-8, 3e-8, 4e-8, 5e-8, 6e-8};
        t.mean = {0, 1, 0, -1, 0, 1};
        t.stderr_.assign(6, 0.0);
        CHECK_THROWS_AS(power_spectrum(t), InvalidParameterError);
    }
}

TEST_CASE("spectra of the three Ramsey variants show the expected peaks") {
    auto spectrum_peaks = [](const RamseyModel& m, double stop_us, int n) {
        const SignalTrace t = synth(m, stop_us, n);
        const PowerSpectrum ps = power_spectrum(t);
        std::vector<double> freqs;
        for (std::size_t k : find_peaks(ps)) freqs.push_back(ps.freq_hz[k]);
        return std::pair(freqs, ps);
    };
    const double a_mhz = 2.166;

    RamseyModel sq;
    sq.kind = RamseyModelKind::SingleQuantum;
    sq.t2_star = 0.91e-6;
    sq.delta = units::khz_to_rad_s(350.0);
    sq.amplitude = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    const auto [fsq, ps_sq] = spectrum_peaks(sq, 8.0, 1600);
    const double bin = 1.0 / (8.0e-6);
    auto has_peak_near = [&](const std::vector<double>& fs, double f_mhz) {
        for (double f : fs)
            if (std::abs(f - f_mhz * 1e6) <= bin) return true;
        return false;
    };
    CHECK(has_peak_near(fsq, 0.35));
    CHECK(has_peak_near(fsq, a_mhz - 0.35));
    CHECK(has_peak_near(fsq, a_mhz + 0.35));

    // the doubled hyperfine lines resolve once the envelope outlives their
    // 2*delta splitting
    RamseyModel dq = sq;
    dq.kind = RamseyModelKind::DoubleQuantum;
    dq.t2_star = 2.0e-6;
    dq.delta = units::khz_to_rad_s(140.0);
    const auto [fdq, ps_dq] = spectrum_peaks(dq, 8.0, 3200);
    CHECK(has_peak_near(fdq, 2 * a_mhz - 0.14));
    CHECK(has_peak_near(fdq, 2 * a_mhz + 0.14));

    RamseyModel mech;
    mech.kind = RamseyModelKind::Mechanical;
    mech.t2_star = 0.45e-6;
    mech.delta = units::khz_to_rad_s(830.0);
    mech.omega_rot = units::mhz_to_rad_s(3.5);
    mech.amplitude = {1.0, 0, 0};
    const SignalTrace tm = synth(mech, 4.0, 1600);
    const PowerSpectrum ps_mech = power_spectrum(tm);
    // exactly one dominant line; window sidelobes stay far below 5% of it
    double pmax = 0.0;
    for (std::size_t k : find_peaks(ps_mech)) pmax = std::max(pmax, ps_mech.power[k]);
    std::vector<double> dominant;
    for (std::size_t k : find_peaks(ps_mech))
        if (ps_mech.power[k] >= 0.05 * pmax) dominant.push_back(ps_mech.freq_hz[k]);
    REQUIRE(dominant.size() == 1);
    CHECK(std::abs(dominant[0] - 4.33e6) <= 1.0 / 4.0e-6);
}

TEST_CASE("two-branch normalization") {
    CHECK(normalize_ramsey(0.7, 0.7, 1.0, 0.0) == 0.0);
    CHECK(normalize_ramsey(1.0, 0.0, 1.0, 0.5) == Approx(1.0));
    // affine invariance
    const double base = normalize_ramsey(0.8, 0.3, 1.0, 0.1);
    CHECK(normalize_ramsey(0.8 + 5.0, 0.3 + 5.0, 1.0 + 5.0, 0.1 + 5.0) == Approx(base));
    CHECK_THROWS_AS(normalize_ramsey(1.0, 0.5, 0.7, 0.7), NumericalError);
}
