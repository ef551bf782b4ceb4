#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nvmech/errors.hpp"
#include "nvmech/resonator.hpp"
#include "nvmech/rng.hpp"
#include "nvmech/spin_hamiltonian.hpp"

namespace nvmech {

using Eigen::Vector3cd;
using Eigen::Vector3d;
using cdouble = std::complex<double>;

// quasi-static bath noise: one detuning draw per shot, constant across the
// sequence
struct NoiseModel {
    enum class Kind { GaussianDetuning, ExponentialEnvelope };
    Kind kind = Kind::GaussianDetuning;
    double t2_star = 0.0; // s

    double sigma() const { // detuning standard deviation, rad/s
        if (t2_star <= 0.0) throw InvalidParameterError("NoiseModel: T2* must be positive");
        return std::sqrt(2.0) / t2_star;
    }
};

inline double draw_detuning(const NoiseModel& noise, std::uint64_t seed) {
    Rng rng(seed);
    return noise.sigma() * rng.normal();
}

// ---------------------------------------------------------------------------
// pulse elements
// ---------------------------------------------------------------------------

struct Polarize {
    double efficiency = 1.0; // fraction pumped into |0>, remainder uniform
};

struct MagneticPulse {
    QubitPair target = QubitPair::ZeroMinus;
    double angle = 0.0;    // nominal rotation angle, rad; sign = rotation sense
    double phase = 0.0;    // drive phase, rad
    double duration = 0.0; // s; used only when idealized == false
    bool idealized = true;
};

struct MechanicalPulse { // square-envelope stress drive on |-1> <-> |+1>
    double duration = 0.0;
    double phase = 0.0;
};

struct MechanicalRingDrive { // gated resonator drive, envelope from RingModel
    RingModel ring;
};

struct AdiabaticPassage {
    int from_ms = +1;
    int to_ms = 0;
    double fidelity = 1.0;
};

struct Wait {
    double duration = 0.0;
};

enum class ReadoutMode { ZeroPopulation, OneMinusZero };

struct Readout {
    ReadoutMode mode = ReadoutMode::OneMinusZero;
};

using PulseElement = std::variant<Polarize, MagneticPulse, MechanicalPulse,
                                  MechanicalRingDrive, AdiabaticPassage, Wait, Readout>;

struct TimedElement {
    double start = 0.0; // s, absolute
    PulseElement element;
};

struct PulseSequence {
    std::vector<TimedElement> elements;
    QubitPair frame = QubitPair::MinusPlus; // qubit whose rotating frame defines
                                            // free-evolution phases

    void add(double start, PulseElement el) { elements.push_back({start, std::move(el)}); }
    void validate() const;
};

inline PulseElement magnetic_pi(QubitPair target, bool idealized,
                                double duration = 30e-9, double phase = 0.0) {
    MagneticPulse p;
    p.target = target;
    p.angle = std::numbers::pi;
    p.phase = phase;
    p.duration = duration;
    p.idealized = idealized;
    return p;
}

inline PulseElement adiabatic_passage(int from_ms, int to_ms, double fidelity) {
    if (fidelity < 0.0 || fidelity > 1.0)
        throw InvalidParameterError("adiabatic_passage: fidelity must be in [0,1]");
    return AdiabaticPassage{from_ms, to_ms, fidelity};
}

inline void PulseSequence::validate() const {
    double last_magnetic_end = -1.0;
    for (const auto& te : elements) {
        if (const auto* m = std::get_if<MagneticPulse>(&te.element)) {
            const double end = te.start + (m->idealized ? 0.0 : m->duration);
            if (te.start < last_magnetic_end - 1e-15)
                throw InvalidParameterError("PulseSequence: overlapping magnetic pulses");
            last_magnetic_end = end;
            if (m->duration < 0.0)
                throw InvalidParameterError("PulseSequence: negative pulse duration");
        } else if (const auto* w = std::get_if<Wait>(&te.element)) {
            if (w->duration < 0.0)
                throw InvalidParameterError("PulseSequence: negative wait");
        } else if (const auto* mp = std::get_if<MechanicalPulse>(&te.element)) {
            if (mp->duration < 0.0)
                throw InvalidParameterError("PulseSequence: negative pulse duration");
        } else if (const auto* ap = std::get_if<AdiabaticPassage>(&te.element)) {
            if (ap->fidelity < 0.0 || ap->fidelity > 1.0)
                throw InvalidParameterError("PulseSequence: passage fidelity outside [0,1]");
        }
    }
}

// ---------------------------------------------------------------------------
// shot context and propagation settings
// ---------------------------------------------------------------------------

struct ShotContext {
    double detuning = 0.0;     // drawn full detuning of the frame qubit, rad/s
    double omega_mech = 0.0;   // stress Rabi frequency at this spin, rad/s
    int m_i = 0;               // nuclear projection propagated in this run
    int resonant_m_i = 0;      // sublevel the drives are tuned to
    double omega_rot = 0.0;    // artificial frame rotation for Ramsey phases
};

struct PropagationSettings {
    double tol = 1e-10;       // Richardson target on the state vector
    int max_refine = 12;
    double ring_eps = 1e-6;   // envelope cutoff for ring drives
};

struct SequenceResult {
    double signal = 0.0;
    Vector3d populations = Vector3d::Zero(); // |+1>, |0>, |-1>
    Vector3cd final_state = Vector3cd::Zero();
    bool population_mode = false;
    double norm_error = 0.0;
    std::vector<std::pair<double, Vector3d>> samples; // (time, populations)
};

namespace detail {

// full detuning of a qubit pair for nuclear projection m_i, given that the
// drive is resonant for resonant_m_i and carries the drawn noise detuning
inline double pair_detuning(const SpinParameters& p, QubitPair pair, int m_i,
                            int resonant_m_i, double drawn) {
    const double a = p.a_par;
    const int dm = m_i - resonant_m_i;
    switch (pair) {
        case QubitPair::MinusPlus: return drawn + 2.0 * a * dm;
        case QubitPair::ZeroMinus: return drawn - a * dm;
        default: return drawn + a * dm;
    }
}

// RK4 with a fixed step bounded by min(pi/(100*w_max), smooth/200) and a
// Richardson h vs h/2 acceptance check; evolves the two amplitudes of the
// driven pair, i d/dt (ua,ub) = H(t) (ua,ub)
template <typename CouplingFn>
inline void propagate_pair(cdouble& ua, cdouble& ub, double half_detuning,
                           CouplingFn coupling, double t1, double t2, double w_max,
                           double smooth_scale, const PropagationSettings& st) {
    if (t2 <= t1) return;
    const double span = t2 - t1;
    double h = std::min(std::numbers::pi / (100.0 * std::max(w_max, 1.0 / span)),
                        smooth_scale / 200.0);
    h = std::min(h, span);

    auto run = [&](double step, cdouble a0, cdouble b0) {
        const int n = std::max(1, static_cast<int>(std::ceil(span / step)));
        const double hh = span / n;
        cdouble a = a0, b = b0;
        const cdouble mi(0.0, -1.0);
        double t = t1;
        for (int k = 0; k < n; ++k) {
            const cdouble c1 = coupling(t);
            const cdouble c2 = coupling(t + 0.5 * hh);
            const cdouble c4 = coupling(t + hh);
            auto rhs = [&](cdouble av, cdouble bv, const cdouble& c) {
                return std::pair<cdouble, cdouble>(
                    mi * (half_detuning * av + c * bv),
                    mi * (std::conj(c) * av - half_detuning * bv));
            };
            auto [k1a, k1b] = rhs(a, b, c1);
            auto [k2a, k2b] = rhs(a + 0.5 * hh * k1a, b + 0.5 * hh * k1b, c2);
            auto [k3a, k3b] = rhs(a + 0.5 * hh * k2a, b + 0.5 * hh * k2b, c2);
            auto [k4a, k4b] = rhs(a + hh * k3a, b + hh * k3b, c4);
            a += hh / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
            b += hh / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
            t += hh;
        }
        return std::pair<cdouble, cdouble>(a, b);
    };

    for (int refine = 0;; ++refine) {
        auto [a1, b1] = run(h, ua, ub);
        auto [a2, b2] = run(0.5 * h, ua, ub);
        // Richardson estimate for the h/2 solution of a 4th-order scheme
        const double est =
            std::max(std::abs(a1 - a2), std::abs(b1 - b2)) / 15.0;
        if (est <= st.tol || h <= 1e-18) {
            ua = a2;
            ub = b2;
            return;
        }
        if (refine >= st.max_refine)
            throw NumericalError("propagate: step-size underflow near t = " +
                                 std::to_string(t1));
        h = std::max(0.9 * h * std::pow(st.tol / est, 0.25), 0.25 * h);
    }
}

inline void apply_pair_rotation(Vector3cd& psi, QubitPair pair, double angle, double phase) {
    const auto [up, lo] = pair_levels(pair);
    const int a = level_index(up), b = level_index(lo);
    const double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
    const cdouble i(0.0, 1.0);
    const cdouble ea = std::exp(-i * phase), eb = std::exp(i * phase);
    const cdouble pa = psi(a), pb = psi(b);
    psi(a) = c * pa - i * s * ea * pb;
    psi(b) = -i * s * eb * pa + c * pb;
}

} // namespace detail

// population transferred to |+1> for a spin prepared in |-1> and exposed to
// the ringing drive over the gate window [t1, t2]; delta is the full
// transition detuning (the diagonal carries delta/2)
inline double mechanical_window_transfer(const RingModel& ring, double omega, double delta,
                                         double t1, double t2,
                                         const PropagationSettings& st = {}) {
    cdouble ua(0.0, 0.0), ub(1.0, 0.0);
    const double cutoff = ring_cutoff(ring, st.ring_eps);
    const double a = std::max(t1, 0.0);
    const double b = std::min(t2, cutoff);
    if (b > a && omega != 0.0) {
        detail::propagate_pair(
            ua, ub, 0.5 * delta,
            [&](double t) { return cdouble(0.5 * omega * ring.envelope(t), 0.0); }, a, b,
            std::hypot(omega, delta), ring.tau_r, st);
    }
    return std::norm(ua);
}

// ---------------------------------------------------------------------------
// sequence execution
// ---------------------------------------------------------------------------

class SequenceRunner {
public:
    SequenceRunner(const SpinParameters& p, PropagationSettings settings = {})
        : p_(p), st_(settings) {}

    SequenceResult run(const PulseSequence& seq, const ShotContext& ctx) const {
        seq.validate();
        auto elements = seq.elements;
        std::stable_sort(elements.begin(), elements.end(),
                         [](const TimedElement& a, const TimedElement& b) {
                             return a.start < b.start;
                         });

        Vector3cd psi = Vector3cd::Zero();
        psi(level_index(0)) = 1.0;
        Vector3d pops = Vector3d::Zero();
        bool population_mode = false;
        std::optional<MechanicalRingDrive> active_ring;
        double ring_start = 0.0;
        double clock = elements.empty() ? 0.0 : elements.front().start;
        SequenceResult result;

        const double frame_delta =
            detail::pair_detuning(p_, seq.frame, ctx.m_i, ctx.resonant_m_i, ctx.detuning);

        auto to_population = [&]() {
            if (!population_mode) {
                for (int k = 0; k < 3; ++k) pops(k) = std::norm(psi(k));
                population_mode = true;
            }
        };

        auto free_evolve = [&](double from, double to) {
            if (to <= from || population_mode) {
                clock = std::max(clock, to);
                return;
            }
            if (active_ring) {
                evolve_ring(psi, *active_ring, ring_start, from, to, ctx, frame_delta);
            } else {
                const auto [up, lo] = pair_levels(seq.frame);
                const cdouble i(0.0, 1.0);
                const double half = 0.5 * frame_delta * (to - from);
                psi(level_index(up)) *= std::exp(-i * half);
                psi(level_index(lo)) *= std::exp(i * half);
            }
            clock = to;
        };

        for (const auto& te : elements) {
            free_evolve(clock, te.start);
            std::visit(
                [&](const auto& el) {
                    using T = std::decay_t<decltype(el)>;
                    if constexpr (std::is_same_v<T, Polarize>) {
                        psi.setZero();
                        psi(level_index(0)) = 1.0;
                        population_mode = false;
                        if (el.efficiency < 1.0) {
                            to_population();
                            const double rest = (1.0 - el.efficiency) / 3.0;
                            pops = Vector3d::Constant(rest);
                            pops(level_index(0)) += el.efficiency;
                        }
                    } else if constexpr (std::is_same_v<T, MagneticPulse>) {
                        require_coherent(population_mode, "magnetic pulse");
                        if (el.idealized) {
                            detail::apply_pair_rotation(psi, el.target, el.angle, el.phase);
                        } else {
                            run_finite_magnetic(psi, el, ctx);
                            clock += el.duration;
                        }
                    } else if constexpr (std::is_same_v<T, MechanicalPulse>) {
                        require_coherent(population_mode, "mechanical pulse");
                        run_square_mechanical(psi, el, ctx);
                        clock += el.duration;
                    } else if constexpr (std::is_same_v<T, MechanicalRingDrive>) {
                        require_coherent(population_mode, "mechanical drive");
                        active_ring = el;
                        ring_start = te.start;
                    } else if constexpr (std::is_same_v<T, AdiabaticPassage>) {
                        to_population();
                        const int a = level_index(el.from_ms), b = level_index(el.to_ms);
                        pops(b) += el.fidelity * pops(a);
                        pops(a) *= (1.0 - el.fidelity);
                    } else if constexpr (std::is_same_v<T, Wait>) {
                        free_evolve(clock, clock + el.duration);
                    } else if constexpr (std::is_same_v<T, Readout>) {
                        if (!population_mode)
                            for (int k = 0; k < 3; ++k) pops(k) = std::norm(psi(k));
                        const double p0 = pops(level_index(0));
                        result.signal =
                            (el.mode == ReadoutMode::ZeroPopulation) ? p0 : 1.0 - p0;
                        result.samples.emplace_back(clock, pops);
                    }
                },
                te.element);
        }

        if (!population_mode) {
            for (int k = 0; k < 3; ++k) pops(k) = std::norm(psi(k));
            result.norm_error = std::abs(psi.norm() - 1.0);
            if (result.norm_error > 10.0 * st_.tol)
                throw NumericalError("propagate: norm drift exceeds 10x tolerance");
        }
        result.final_state = psi;
        result.populations = pops;
        result.population_mode = population_mode;
        return result;
    }

private:
    static void require_coherent(bool population_mode, const char* what) {
        if (population_mode)
            throw InvalidParameterError(std::string("sequence: ") + what +
                                        " after adiabatic passage is not supported");
    }

    void run_finite_magnetic(Vector3cd& psi, const MagneticPulse& el,
                             const ShotContext& ctx) const {
        const double delta =
            detail::pair_detuning(p_, el.target, ctx.m_i, ctx.resonant_m_i, ctx.detuning);
        const double omega = std::abs(el.angle) / el.duration;
        const auto [up, lo] = pair_levels(el.target);
        cdouble ua = psi(level_index(up)), ub = psi(level_index(lo));
        const cdouble i(0.0, 1.0);
        const double sign = el.angle >= 0.0 ? 1.0 : -1.0;
        const cdouble c = 0.5 * omega * sign * std::exp(-i * el.phase);
        detail::propagate_pair(
            ua, ub, 0.5 * delta, [&](double) { return c; }, 0.0, el.duration,
            std::hypot(omega, delta), el.duration, st_);
        psi(level_index(up)) = ua;
        psi(level_index(lo)) = ub;
    }

    void run_square_mechanical(Vector3cd& psi, const MechanicalPulse& el,
                               const ShotContext& ctx) const {
        if (el.duration <= 0.0) return;
        const double delta = detail::pair_detuning(p_, QubitPair::MinusPlus, ctx.m_i,
                                                   ctx.resonant_m_i, ctx.detuning);
        cdouble ua = psi(level_index(+1)), ub = psi(level_index(-1));
        if (std::abs(ua) + std::abs(ub) == 0.0) return; // |0> is untouched
        const cdouble i(0.0, 1.0);
        const cdouble c = 0.5 * ctx.omega_mech * std::exp(-i * el.phase);
        detail::propagate_pair(
            ua, ub, 0.5 * delta, [&](double) { return c; }, 0.0, el.duration,
            std::hypot(ctx.omega_mech, delta), el.duration, st_);
        psi(level_index(+1)) = ua;
        psi(level_index(-1)) = ub;
    }

    void evolve_ring(Vector3cd& psi, const MechanicalRingDrive& drive, double ring_start,
                     double from, double to, const ShotContext& ctx,
                     double frame_delta) const {
        const RingModel& ring = drive.ring;
        const double cutoff = ring_start + ring_cutoff(ring, st_.ring_eps);
        const double drive_to = std::min(to, cutoff);
        cdouble ua = psi(level_index(+1)), ub = psi(level_index(-1));
        const bool pair_empty = (std::abs(ua) + std::abs(ub)) == 0.0;
        if (!pair_empty && drive_to > from) {
            detail::propagate_pair(
                ua, ub, 0.5 * frame_delta,
                [&](double t) {
                    return cdouble(0.5 * ctx.omega_mech * ring.envelope(t - ring_start), 0.0);
                },
                from, drive_to, std::hypot(ctx.omega_mech, frame_delta), ring.tau_r, st_);
        }
        if (to > drive_to && !pair_empty) { // free tail beyond the cutoff
            const cdouble i(0.0, 1.0);
            const double half = 0.5 * frame_delta * (to - drive_to);
            ua *= std::exp(-i * half);
            ub *= std::exp(i * half);
        }
        psi(level_index(+1)) = ua;
        psi(level_index(-1)) = ub;
    }

    SpinParameters p_;
    PropagationSettings st_;
};

// ---------------------------------------------------------------------------
// canonical sequences
// ---------------------------------------------------------------------------

// constant-average-power Rabi protocol: the trailing balance pulse keeps the
// duty cycle fixed and must not change the readout
inline PulseSequence sequence_rabi_lowq(double tau, double total_length) {
    if (tau < 0.0 || tau > total_length)
        throw InvalidParameterError("sequence_rabi_lowq: need 0 <= tau <= L");
    PulseSequence seq;
    seq.frame = QubitPair::MinusPlus;
    seq.add(0.0, Polarize{});
    seq.add(0.0, magnetic_pi(QubitPair::ZeroMinus, true));
    seq.add(0.0, MechanicalPulse{tau, 0.0});
    seq.add(tau, magnetic_pi(QubitPair::ZeroMinus, true));
    seq.add(tau, MechanicalPulse{total_length - tau, 0.0});
    seq.add(total_length, Readout{ReadoutMode::OneMinusZero});
    return seq;
}

// swept pi-pulse pair through a gated ringing drive; only the window between
// the two pi-pulses exposes the spin to the stress field
inline PulseSequence sequence_rabi_highq(double tau0, double tau_mag, const RingModel& ring) {
    PulseSequence seq;
    seq.frame = QubitPair::MinusPlus;
    const double lead = std::min(0.0, tau0);
    seq.add(lead, Polarize{});
    seq.add(0.0, MechanicalRingDrive{ring});
    seq.add(tau0, magnetic_pi(QubitPair::ZeroMinus, true));
    seq.add(tau0 + tau_mag, magnetic_pi(QubitPair::ZeroMinus, true));
    seq.add(tau0 + tau_mag, Readout{ReadoutMode::OneMinusZero});
    return seq;
}

enum class RamseyKind { Mechanical, DoubleQuantum, SingleQuantumZeroMinus, SingleQuantumPlusZero };

// two-branch Ramsey: run once with second_pulse_sign=+1 and once with -1; the
// difference of the two readouts is twice the imaginary coherence
inline PulseSequence sequence_ramsey(RamseyKind kind, double tau, int second_pulse_sign,
                                     double omega_rot, double mech_half_pi_duration = 0.0) {
    if (second_pulse_sign != 1 && second_pulse_sign != -1)
        throw InvalidParameterError("sequence_ramsey: sign must be +1 or -1");
    const double pi_half = std::numbers::pi / 2.0;
    PulseSequence seq;
    double t = 0.0;
    seq.add(t, Polarize{});
    switch (kind) {
        case RamseyKind::Mechanical: {
            seq.frame = QubitPair::MinusPlus;
            if (mech_half_pi_duration <= 0.0)
                throw InvalidParameterError("sequence_ramsey: mechanical pi/2 length required");
            seq.add(t, magnetic_pi(QubitPair::ZeroMinus, true));
            seq.add(t, MechanicalPulse{mech_half_pi_duration, 0.0});
            t += mech_half_pi_duration;
            seq.add(t, Wait{tau});
            t += tau;
            // phase of the second pulse advances at omega_rot*(tau + t_pi/2)
            const double adv = omega_rot * (tau + mech_half_pi_duration);
            const double phase = adv + (second_pulse_sign < 0 ? std::numbers::pi : 0.0);
            seq.add(t, MechanicalPulse{mech_half_pi_duration, phase});
            t += mech_half_pi_duration;
            seq.add(t, magnetic_pi(QubitPair::ZeroMinus, true));
            seq.add(t, Readout{ReadoutMode::OneMinusZero});
            break;
        }
        case RamseyKind::DoubleQuantum: {
            seq.frame = QubitPair::MinusPlus;
            MagneticPulse half{QubitPair::ZeroMinus, pi_half, 0.0, 0.0, true};
            seq.add(t, half);
            seq.add(t, magnetic_pi(QubitPair::PlusZero, true));
            seq.add(t, Wait{tau});
            t += tau;
            seq.add(t, magnetic_pi(QubitPair::PlusZero, true));
            MagneticPulse back{QubitPair::ZeroMinus, second_pulse_sign * pi_half, 0.0, 0.0, true};
            seq.add(t, back);
            seq.add(t, Readout{ReadoutMode::ZeroPopulation});
            break;
        }
        default: {
            const QubitPair pair = (kind == RamseyKind::SingleQuantumZeroMinus)
                                       ? QubitPair::ZeroMinus
                                       : QubitPair::PlusZero;
            seq.frame = pair;
            MagneticPulse half{pair, pi_half, 0.0, 0.0, true};
            seq.add(t, half);
            seq.add(t, Wait{tau});
            t += tau;
            MagneticPulse back{pair, second_pulse_sign * pi_half, 0.0, 0.0, true};
            seq.add(t, back);
            seq.add(t, Readout{ReadoutMode::ZeroPopulation});
            break;
        }
    }
    return seq;
}

// pi/2 - tau - pi - tau - (+/-)pi/2; refocuses quasi-static detunings exactly
inline PulseSequence sequence_hahn(RamseyKind kind, double tau, int second_pulse_sign = 1) {
    const double pi_half = std::numbers::pi / 2.0;
    const QubitPair pair = (kind == RamseyKind::SingleQuantumZeroMinus)
                               ? QubitPair::ZeroMinus
                               : QubitPair::PlusZero;
    if (kind == RamseyKind::Mechanical || kind == RamseyKind::DoubleQuantum)
        throw InvalidParameterError("sequence_hahn: magnetic single-quantum qubits only");
    PulseSequence seq;
    seq.frame = pair;
    double t = 0.0;
    seq.add(t, Polarize{});
    seq.add(t, MagneticPulse{pair, pi_half, 0.0, 0.0, true});
    seq.add(t, Wait{tau});
    t += tau;
    seq.add(t, magnetic_pi(pair, true));
    seq.add(t, Wait{tau});
    t += tau;
    seq.add(t, MagneticPulse{pair, second_pulse_sign * pi_half, 0.0, 0.0, true});
    seq.add(t, Readout{ReadoutMode::ZeroPopulation});
    return seq;
}

} // namespace nvmech
