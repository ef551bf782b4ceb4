#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nvmech/pulse_engine.hpp"
#include "nvmech/units.hpp"

using namespace nvmech;
using Catch::Approx;

namespace {

const SpinParameters kSpin;

SequenceResult run_lowq(double tau, double total, double omega, double delta,
                        int m_i = 0) {
    const SequenceRunner runner(kSpin, PropagationSettings{1e-10, 12, 1e-6});
    ShotContext ctx;
    ctx.omega_mech = omega;
    ctx.detuning = delta;
    ctx.m_i = m_i;
    return runner.run(sequence_rabi_lowq(tau, total), ctx);
}

} // namespace

TEST_CASE("detuning draws") {
    NoiseModel noise{NoiseModel::Kind::GaussianDetuning, 0.45e-6};
    // sigma = sqrt(2)/T2* -> sigma/2pi = 0.50 MHz
    CHECK(units::rad_s_to_mhz(noise.sigma()) == Approx(0.5002).margin(5e-4));
    CHECK(noise.sigma() * noise.t2_star == Approx(std::sqrt(2.0)).epsilon(1e-15));

    double sum = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) sum += draw_detuning(noise, mix_seed(99, k));
    CHECK(std::abs(sum / n) < 4.0 * noise.sigma() / std::sqrt(double(n)));

    CHECK(draw_detuning(noise, 1234) == draw_detuning(noise, 1234));
    CHECK(draw_detuning(noise, 1234) != draw_detuning(noise, 1235));
}

TEST_CASE("resonant square drive follows the Rabi formula") {
    const double omega = units::mhz_to_rad_s(1.0);
    for (double t_us : {0.1, 0.25, 0.6, 1.3, 2.7}) {
        const double t = units::us_to_s(t_us);
        const double got = run_lowq(t, t, omega, 0.0).signal;
        const double want = std::pow(std::sin(0.5 * omega * t), 2);
        CHECK(got == Approx(want).margin(1e-8));
    }
}

TEST_CASE("detuned square drive follows the generalized Rabi formula") {
    const double omega = units::mhz_to_rad_s(1.0);
    for (double d_mhz : {0.3, 1.0, -2.2}) {
        const double delta = units::mhz_to_rad_s(d_mhz);
        for (double t_us : {0.2, 0.9, 1.7}) {
            const double t = units::us_to_s(t_us);
            const double g = std::sqrt(omega * omega + delta * delta);
            const double want =
                omega * omega / (g * g) * std::pow(std::sin(0.5 * g * t), 2);
            CHECK(run_lowq(t, t, omega, delta).signal == Approx(want).margin(1e-6));
        }
    }
}

TEST_CASE("ringing drive at zero detuning reduces to the pulse-area solution") {
    const RingModel ring = RingModel::create(units::mhz_to_rad_s(529.0), 4000.0, 3e-6);
    const double omega = units::mhz_to_rad_s(3.8);
    const PropagationSettings st{1e-9, 12, 1e-9};
    for (double t1_us : {0.0, 0.6, 2.0, 3.5}) {
        const double t1 = units::us_to_s(t1_us);
        const double t2 = t1 + units::us_to_s(5.4069);
        const double area = pulse_area(ring, t1, t2);
        const double want = std::pow(std::sin(0.5 * omega * area), 2);
        CHECK(mechanical_window_transfer(ring, omega, 0.0, t1, t2, st) ==
              Approx(want).margin(1e-6));
    }
}

TEST_CASE("idealized pi pulses shuttle population") {
    const SequenceRunner runner(kSpin);
    ShotContext ctx;

    PulseSequence seq;
    seq.add(0.0, Polarize{});
    seq.add(0.0, magnetic_pi(QubitPair::ZeroMinus, true));
    seq.add(0.0, Readout{ReadoutMode::ZeroPopulation});
    CHECK(runner.run(seq, ctx).populations(level_index(-1)) == Approx(1.0));
    CHECK(runner.run(seq, ctx).signal == Approx(0.0).margin(1e-15));

    PulseSequence twice;
    twice.add(0.0, Polarize{});
    twice.add(0.0, magnetic_pi(QubitPair::ZeroMinus, true));
    twice.add(0.0, magnetic_pi(QubitPair::ZeroMinus, true));
    twice.add(0.0, Readout{ReadoutMode::ZeroPopulation});
    CHECK(runner.run(twice, ctx).signal == Approx(1.0).margin(1e-12));
}

TEST_CASE("a finite 30 ns pi pulse still transfers more than 99 percent") {
    const SequenceRunner runner(kSpin, PropagationSettings{1e-10, 12, 1e-6});
    ShotContext ctx;
    PulseSequence seq;
    seq.add(0.0, Polarize{});
    seq.add(0.0, magnetic_pi(QubitPair::ZeroMinus, false, 30e-9));
    seq.add(30e-9, Readout{ReadoutMode::ZeroPopulation});
    const auto res = runner.run(seq, ctx);
    CHECK(res.populations(level_index(-1)) >= 0.99);
}

TEST_CASE("low-Q protocol edge cases") {
    const double omega = units::mhz_to_rad_s(1.0);
    const double total = units::us_to_s(3.0);

    // tau = 0: nothing leaves |-1|
    CHECK(run_lowq(0.0, total, omega, 0.0).signal == Approx(0.0).margin(1e-10));

    // tau = pi/Omega at the antinode: full transfer for the driven sublevel
    const double t_pi = std::numbers::pi / omega;
    CHECK(run_lowq(t_pi, total, omega, 0.0).signal == Approx(1.0).margin(1e-8));

    // the balancing pulse must not touch the readout
    const double tau = units::us_to_s(0.37);
    const SequenceRunner runner(kSpin, PropagationSettings{1e-10, 12, 1e-6});
    ShotContext ctx;
    ctx.omega_mech = omega;
    PulseSequence bare;
    bare.add(0.0, Polarize{});
    bare.add(0.0, magnetic_pi(QubitPair::ZeroMinus, true));
    bare.add(0.0, MechanicalPulse{tau, 0.0});
    bare.add(tau, magnetic_pi(QubitPair::ZeroMinus, true));
    bare.add(tau, Readout{ReadoutMode::OneMinusZero});
    const double with_balance = run_lowq(tau, total, omega, 0.0).signal;
    const double without = runner.run(bare, ctx).signal;
    CHECK(std::abs(with_balance - without) < 1e-12);
}

TEST_CASE("mechanical drive never changes the |0> population") {
    const SequenceRunner runner(kSpin, PropagationSettings{1e-10, 12, 1e-6});
    ShotContext ctx;
    ctx.omega_mech = units::mhz_to_rad_s(2.0);
    ctx.detuning = units::mhz_to_rad_s(0.4);
    PulseSequence seq; // drive straight after polarizing: |0> must stay put
    seq.add(0.0, Polarize{});
    seq.add(0.0, MechanicalPulse{units::us_to_s(1.7), 0.0});
    seq.add(units::us_to_s(1.7), Readout{ReadoutMode::ZeroPopulation});
    CHECK(runner.run(seq, ctx).signal == Approx(1.0).margin(1e-12));
}

TEST_CASE("high-Q window protocol") {
    const RingModel ring = RingModel::create(units::mhz_to_rad_s(529.0), 4000.0, 3e-6);
    const double tau_mag = ring.length + ring.tau_r;
    const double omega = units::mhz_to_rad_s(3.8);
    const SequenceRunner runner(kSpin, PropagationSettings{1e-8, 12, 1e-6});
    ShotContext ctx;
    ctx.omega_mech = omega;

    // window fully before ring-up: no exposure, no transfer
    const auto early = runner.run(sequence_rabi_highq(-2.0 * tau_mag, tau_mag, ring), ctx);
    CHECK(early.signal == Approx(0.0).margin(1e-10));

    // the sequence reproduces the bare window propagation
    for (double tau0_us : {-1.0, 0.4, 2.0, 4.0}) {
        const double tau0 = units::us_to_s(tau0_us);
        const auto seq = runner.run(sequence_rabi_highq(tau0, tau_mag, ring), ctx);
        const double want = mechanical_window_transfer(
            ring, omega, 0.0, tau0, tau0 + tau_mag, PropagationSettings{1e-8, 12, 1e-6});
        CHECK(seq.signal == Approx(want).margin(1e-7));
    }

    // maximal area -> maximal transfer when the total angle stays below pi
    const double t_best = optimal_window_start(ring, tau_mag);
    const double omega_small = units::mhz_to_rad_s(0.2);
    ctx.omega_mech = omega_small;
    const double best =
        runner.run(sequence_rabi_highq(t_best, tau_mag, ring), ctx).signal;
    for (double off : {-1.5e-6, -0.5e-6, 0.7e-6, 2.0e-6}) {
        const double other =
            runner.run(sequence_rabi_highq(t_best + off, tau_mag, ring), ctx).signal;
        CHECK(other <= best + 1e-9);
    }
}

TEST_CASE("Ramsey sequences") {
    const double omega = units::mhz_to_rad_s(1.0);
    const SequenceRunner runner(kSpin, PropagationSettings{1e-10, 12, 1e-6});
    ShotContext ctx;
    ctx.omega_mech = omega;

    SECTION("mechanical, zero delay, matching pulses transfer fully") {
        const double t_half = 0.5 * std::numbers::pi / omega;
        const auto plus =
            runner.run(sequence_ramsey(RamseyKind::Mechanical, 0.0, +1, 0.0, t_half), ctx);
        CHECK(plus.signal == Approx(1.0).margin(1e-8)); // 1 - P0 = P(+1)
        const auto minus =
            runner.run(sequence_ramsey(RamseyKind::Mechanical, 0.0, -1, 0.0, t_half), ctx);
        CHECK(minus.signal == Approx(0.0).margin(1e-8));
    }

    SECTION("single-quantum, zero delay") {
        const auto plus = runner.run(
            sequence_ramsey(RamseyKind::SingleQuantumZeroMinus, 0.0, +1, 0.0), ctx);
        const auto minus = runner.run(
            sequence_ramsey(RamseyKind::SingleQuantumZeroMinus, 0.0, -1, 0.0), ctx);
        // difference of the two branches is the full coherence
        CHECK(std::abs(plus.signal - minus.signal) == Approx(1.0).margin(1e-10));
    }

    SECTION("free evolution phase shows up at the drawn detuning") {
        ctx.detuning = units::mhz_to_rad_s(0.8);
        const double period = units::two_pi / ctx.detuning;
        const auto at = [&](double tau) {
            const auto p = runner.run(
                sequence_ramsey(RamseyKind::SingleQuantumZeroMinus, tau, +1, 0.0), ctx);
            const auto m = runner.run(
                sequence_ramsey(RamseyKind::SingleQuantumZeroMinus, tau, -1, 0.0), ctx);
            return p.signal - m.signal;
        };
        CHECK(at(period) == Approx(at(0.0)).margin(1e-9));
        CHECK(at(0.5 * period) == Approx(-at(0.0)).margin(1e-9));
    }

    SECTION("double-quantum multipulse accumulates the doubled hyperfine offset") {
        ctx.detuning = 0.0;
        ctx.m_i = +1; // drive referenced to m_I = 0
        const double offset = 2.0 * std::abs(kSpin.a_par); // 2 A_par offset
        const double period = units::two_pi / offset;
        const auto at = [&](double tau) {
            const auto p =
                runner.run(sequence_ramsey(RamseyKind::DoubleQuantum, tau, +1, 0.0), ctx);
            const auto m =
                runner.run(sequence_ramsey(RamseyKind::DoubleQuantum, tau, -1, 0.0), ctx);
            return p.signal - m.signal;
        };
        CHECK(at(period) == Approx(at(0.0)).margin(1e-9));
    }
}

TEST_CASE("Hahn echo refocuses quasi-static detuning") {
    const SequenceRunner runner(kSpin);
    const NoiseModel noise{NoiseModel::Kind::GaussianDetuning, 0.9e-6};
    const double tau = units::us_to_s(0.7);

    double mean = 0.0, m2 = 0.0;
    const int n = 64;
    for (int k = 0; k < n; ++k) {
        ShotContext ctx;
        ctx.detuning = draw_detuning(noise, mix_seed(5, k));
        const auto p =
            runner.run(sequence_hahn(RamseyKind::SingleQuantumZeroMinus, tau, +1), ctx);
        const auto m =
            runner.run(sequence_hahn(RamseyKind::SingleQuantumZeroMinus, tau, -1), ctx);
        const double echo = p.signal - m.signal;
        const double d = echo - mean;
        mean += d / (k + 1);
        m2 += d * (echo - mean);
    }
    CHECK(m2 / (n - 1) < 1e-10); // delta-independent
    CHECK(std::abs(mean) == Approx(1.0).margin(1e-9));

    // tau = 0 composes to a 2pi rotation: populations return to the start
    ShotContext ctx;
    ctx.detuning = units::mhz_to_rad_s(0.3);
    const auto closed =
        runner.run(sequence_hahn(RamseyKind::SingleQuantumZeroMinus, 0.0, +1), ctx);
    CHECK(closed.signal == Approx(1.0).margin(1e-12));

    // without the refocusing pulse the signal does depend on the draw
    const auto ram = [&](double delta) {
        ShotContext c;
        c.detuning = delta;
        const auto p = runner.run(
            sequence_ramsey(RamseyKind::SingleQuantumZeroMinus, tau, +1, 0.0), c);
        const auto m = runner.run(
            sequence_ramsey(RamseyKind::SingleQuantumZeroMinus, tau, -1, 0.0), c);
        return p.signal - m.signal;
    };
    CHECK(std::abs(ram(units::mhz_to_rad_s(0.5)) - ram(0.0)) > 0.1);
}

TEST_CASE("adiabatic passage moves population at the configured fidelity") {
    const SequenceRunner runner(kSpin, PropagationSettings{1e-10, 12, 1e-6});
    const double omega = units::mhz_to_rad_s(1.0);
    const double t_pi = std::numbers::pi / omega;

    auto readout_via = [&](int from_ms, double fidelity) {
        PulseSequence seq;
        seq.add(0.0, Polarize{});
        seq.add(0.0, magnetic_pi(QubitPair::ZeroMinus, true));
        seq.add(0.0, MechanicalPulse{t_pi, 0.0}); // full |-1> -> |+1|
        seq.add(t_pi, adiabatic_passage(from_ms, 0, fidelity));
        seq.add(t_pi, Readout{ReadoutMode::ZeroPopulation});
        ShotContext ctx;
        ctx.omega_mech = omega;
        return runner.run(seq, ctx);
    };

    CHECK(readout_via(+1, 1.0).signal == Approx(1.0).margin(1e-8));
    CHECK(readout_via(+1, 0.9).signal == Approx(0.9).margin(1e-8));
    CHECK(readout_via(-1, 1.0).signal == Approx(0.0).margin(1e-8));

    // coherent operations after a passage are rejected
    PulseSequence bad;
    bad.add(0.0, Polarize{});
    bad.add(0.0, adiabatic_passage(+1, 0, 1.0));
    bad.add(0.0, MechanicalPulse{1e-6, 0.0});
    ShotContext ctx;
    ctx.omega_mech = omega;
    CHECK_THROWS_AS(runner.run(bad, ctx), InvalidParameterError);
}

TEST_CASE("norm and population bookkeeping") {
    const SequenceRunner runner(kSpin, PropagationSettings{1e-10, 12, 1e-6});
    ShotContext ctx;
    ctx.omega_mech = units::mhz_to_rad_s(3.8);
    ctx.detuning = units::mhz_to_rad_s(0.7);
    const RingModel ring = RingModel::create(units::mhz_to_rad_s(529.0), 4000.0, 3e-6);
    const auto res =
        runner.run(sequence_rabi_highq(0.5e-6, ring.length + ring.tau_r, ring), ctx);
    CHECK(res.norm_error < 1e-8);
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        CHECK(res.populations(k) >= -1e-12);
        CHECK(res.populations(k) <= 1.0 + 1e-12);
        sum += res.populations(k);
    }
    CHECK(sum == Approx(1.0).margin(1e-8));
}

TEST_CASE("sequence validation rejects overlapping magnetic pulses") {
    PulseSequence seq;
    seq.add(0.0, magnetic_pi(QubitPair::ZeroMinus, false, 100e-9));
    seq.add(50e-9, magnetic_pi(QubitPair::ZeroMinus, false, 100e-9));
    CHECK_THROWS_AS(seq.validate(), InvalidParameterError);
}
