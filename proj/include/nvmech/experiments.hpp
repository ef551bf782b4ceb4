#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nvmech/analysis.hpp"
#include "nvmech/config.hpp"
#include "nvmech/crystal_stress.hpp"
#include "nvmech/ensemble.hpp"
#include "nvmech/parallel.hpp"
#include "nvmech/pulse_engine.hpp"
#include "nvmech/signal_trace.hpp"

namespace nvmech {

inline constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Ramsey / Hahn protocol runners (two-branch difference + contrast
// normalization, averaged over nuclear sublevels and noise draws)
// ---------------------------------------------------------------------------

struct ProtocolConfig {
    RamseyKind kind = RamseyKind::SingleQuantumZeroMinus;
    std::vector<double> tau_grid;         // s
    NoiseModel noise;
    double delta_sys = 0.0;               // systematic drive detuning, rad/s
    double omega_rot = 0.0;               // rad/s, mechanical qubit only
    double omega_mech = 0.0;              // rad/s, mechanical pi/2 strength
    std::array<double, 3> weights{1.0 / 3, 1.0 / 3, 1.0 / 3}; // m_I = +1, 0, -1
    double contrast_offset = 0.0;
    double contrast_scale = 1.0;
    int shots = 200;
    std::uint64_t seed = 1;
    int workers = 0;
    SpinParameters spin;
    bool echo = false; // insert a refocusing pi pulse (Hahn)
};

namespace detail {

inline double weighted_p0(const SequenceRunner& runner, const PulseSequence& seq,
                          const ProtocolConfig& pc, double detuning) {
    double p0 = 0.0;
    for (int m = -1; m <= 1; ++m) {
        const double w = pc.weights[static_cast<std::size_t>(level_index(m))];
        if (w == 0.0) continue;
        ShotContext ctx;
        ctx.detuning = detuning;
        ctx.omega_mech = pc.omega_mech;
        ctx.m_i = m;
        ctx.resonant_m_i = 0;
        p0 += w * runner.run(seq, ctx).populations(level_index(0));
    }
    return p0;
}

// minimum-signal reference: a single pi on the qubit, or the
// pi_mag - pi_mech - pi_mag sandwich for the mechanical qubit
inline double reference_pi_p0(const SequenceRunner& runner, const ProtocolConfig& pc,
                              double detuning) {
    auto single_pi = [&](QubitPair pair) {
        PulseSequence s;
        s.frame = pair;
        s.add(0.0, Polarize{});
        s.add(0.0, magnetic_pi(pair, true));
        s.add(0.0, Readout{ReadoutMode::ZeroPopulation});
        return weighted_p0(runner, s, pc, detuning);
    };
    switch (pc.kind) {
        case RamseyKind::SingleQuantumZeroMinus: return single_pi(QubitPair::ZeroMinus);
        case RamseyKind::SingleQuantumPlusZero: return single_pi(QubitPair::PlusZero);
        case RamseyKind::DoubleQuantum:
            return 0.5 * (single_pi(QubitPair::ZeroMinus) + single_pi(QubitPair::PlusZero));
        default: {
            PulseSequence s;
            s.frame = QubitPair::MinusPlus;
            const double t_pi = std::numbers::pi / pc.omega_mech;
            s.add(0.0, Polarize{});
            s.add(0.0, magnetic_pi(QubitPair::ZeroMinus, true));
            s.add(0.0, MechanicalPulse{t_pi, 0.0});
            s.add(t_pi, magnetic_pi(QubitPair::ZeroMinus, true));
            s.add(t_pi, Readout{ReadoutMode::ZeroPopulation});
            return weighted_p0(runner, s, pc, detuning);
        }
    }
}

} // namespace detail

// coherence trace Im[rho](tau) for the configured qubit
inline SignalTrace protocol_trace(const ProtocolConfig& pc) {
    if (pc.kind == RamseyKind::Mechanical && pc.omega_mech <= 0.0)
        throw InvalidParameterError("protocol_trace: mechanical qubit needs omega_mech > 0");
    const bool envelope_mode = pc.noise.kind == NoiseModel::Kind::ExponentialEnvelope;
    const int shots = envelope_mode ? 1 : pc.shots;
    const SequenceRunner runner(pc.spin);
    const double t_half = pc.kind == RamseyKind::Mechanical
                              ? 0.5 * std::numbers::pi / pc.omega_mech
                              : 0.0;

    auto shot_values = [&](std::size_t s) {
        const double drawn =
            envelope_mode ? 0.0 : draw_detuning(pc.noise, mix_seed(pc.seed, s));
        const double detuning = pc.delta_sys + drawn;
        const double y_np = contrast_map(1.0, pc.contrast_offset, pc.contrast_scale);
        const double y_pi = contrast_map(detail::reference_pi_p0(runner, pc, detuning),
                                         pc.contrast_offset, pc.contrast_scale);
        std::vector<double> vals(pc.tau_grid.size());
        for (std::size_t i = 0; i < pc.tau_grid.size(); ++i) {
            const double tau = pc.tau_grid[i];
            PulseSequence plus, minus;
            if (pc.echo) {
                plus = sequence_hahn(pc.kind, tau, +1);
                minus = sequence_hahn(pc.kind, tau, -1);
            } else {
                plus = sequence_ramsey(pc.kind, tau, +1, pc.omega_rot, t_half);
                minus = sequence_ramsey(pc.kind, tau, -1, pc.omega_rot, t_half);
            }
            const double yp = contrast_map(detail::weighted_p0(runner, plus, pc, detuning),
                                           pc.contrast_offset, pc.contrast_scale);
            const double ym = contrast_map(detail::weighted_p0(runner, minus, pc, detuning),
                                           pc.contrast_offset, pc.contrast_scale);
            vals[i] = normalize_ramsey(yp, ym, y_np, y_pi);
            if (envelope_mode) vals[i] *= std::exp(-tau / pc.noise.t2_star);
        }
        return vals;
    };

    const auto per_shot = parallel_map<std::vector<double>>(
        static_cast<std::size_t>(shots), pc.workers, shot_values);
    SignalTrace trace;
    trace.abscissa = pc.tau_grid;
    detail::fold_shots(trace, per_shot, 1.0);
    return trace;
}

// readout-path control: the same square mechanical Rabi sweep read out through
// an adiabatic passage from |+1> or from |-1>
struct ReadoutControlConfig {
    std::vector<double> tau_grid; // s
    double omega = 0.0;           // rad/s
    NoiseModel noise;
    double fidelity_plus = 1.0;
    double fidelity_minus = 1.0;
    std::array<double, 3> weights{1.0 / 3, 1.0 / 3, 1.0 / 3};
    int shots = 200;
    std::uint64_t seed = 1;
    int workers = 0;
    SpinParameters spin;
};

inline std::pair<SignalTrace, SignalTrace> readout_control_traces(
    const ReadoutControlConfig& rc) {
    const SequenceRunner runner(rc.spin);
    auto build = [&](double tau, int from_ms, double fidelity) {
        PulseSequence s;
        s.frame = QubitPair::MinusPlus;
        s.add(0.0, Polarize{});
        s.add(0.0, magnetic_pi(QubitPair::ZeroMinus, true));
        s.add(0.0, MechanicalPulse{tau, 0.0});
        s.add(tau, adiabatic_passage(from_ms, 0, fidelity));
        s.add(tau, Readout{ReadoutMode::ZeroPopulation});
        return s;
    };
    auto shot_values = [&](bool via_plus) {
        return [&, via_plus](std::size_t s) {
            const double detuning = draw_detuning(rc.noise, mix_seed(rc.seed, s));
            std::vector<double> vals(rc.tau_grid.size());
            for (std::size_t i = 0; i < rc.tau_grid.size(); ++i) {
                double p0 = 0.0;
                for (int m = -1; m <= 1; ++m) {
                    const double w = rc.weights[static_cast<std::size_t>(level_index(m))];
                    if (w == 0.0) continue;
                    ShotContext ctx;
                    ctx.detuning = detuning;
                    ctx.omega_mech = rc.omega;
                    ctx.m_i = m;
                    const PulseSequence seq =
                        via_plus ? build(rc.tau_grid[i], +1, rc.fidelity_plus)
                                 : build(rc.tau_grid[i], -1, rc.fidelity_minus);
                    p0 += w * runner.run(seq, ctx).populations(level_index(0));
                }
                vals[i] = p0;
            }
            return vals;
        };
    };
    SignalTrace plus, minus;
    plus.abscissa = rc.tau_grid;
    minus.abscissa = rc.tau_grid;
    const auto plus_shots = parallel_map<std::vector<double>>(rc.shots, rc.workers,
                                                              shot_values(true));
    const auto minus_shots = parallel_map<std::vector<double>>(rc.shots, rc.workers,
                                                               shot_values(false));
    detail::fold_shots(plus, plus_shots, 1.0);
    detail::fold_shots(minus, minus_shots, 1.0);
    return {plus, minus};
}

// ---------------------------------------------------------------------------
// manifest and output helpers
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw NumericalError("cannot open for writing: " + path.string());
    f << text;
}

struct RunArtifacts {
    std::vector<std::string> files; // relative to out_dir
};

} // namespace nvmech

#include "nvmech/bundled_configs.hpp"
#include "nvmech/run_experiment.hpp"
