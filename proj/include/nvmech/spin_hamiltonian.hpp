#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "nvmech/errors.hpp"
#include "nvmech/units.hpp"

namespace nvmech {

using Eigen::Matrix3cd;
using Matrix9cd = Eigen::Matrix<std::complex<double>, 9, 9>;

// basis ordering |+1>, |0>, |-1> for the electron spin and m_I = +1, 0, -1
// for the nucleus; index helpers keep the two conventions in one place
inline int level_index(int m) { return 1 - m; }

// ground-state constants; angular frequency units (rad/s), field in gauss,
// stress in Pa
struct SpinParameters {
    double d0 = units::mhz_to_rad_s(2870.0);        // zero-field splitting
    double gamma = units::mhz_to_rad_s(2.8);        // rad/s per gauss
    double eps_perp = units::mhz_to_rad_s(0.015) / units::mpa_to_pa(1.0);
    double eps_par = units::mhz_to_rad_s(0.012) / units::mpa_to_pa(1.0);
    double p_quad = units::mhz_to_rad_s(-4.945);    // nuclear quadrupole
    double a_par = units::mhz_to_rad_s(-2.166);     // axial hyperfine

    void validate() const {
        if (d0 <= 0.0 || gamma <= 0.0)
            throw InvalidParameterError("SpinParameters: D0 and gamma must be positive");
    }
};

struct FieldConfig {
    double b_par = 0.0;   // gauss
    double b_perp = 0.0;  // gauss; for rotating-frame magnetic drives this is
                          // the drive amplitude
    double sigma_par = 0.0; // Pa, defect-frame axial stress
    double sigma_x = 0.0;   // Pa, transverse stress components
    double sigma_y = 0.0;
};

struct SpinOperators {
    Matrix3cd sx, sy, sz;
};

inline SpinOperators spin1_operators() {
    const double r = 1.0 / std::sqrt(2.0);
    const std::complex<double> i(0.0, 1.0);
    SpinOperators ops;
    ops.sx << 0, r, 0, r, 0, r, 0, r, 0;
    ops.sy << 0, -i * r, 0, i * r, 0, -i * r, 0, i * r, 0;
    ops.sz << 1, 0, 0, 0, 0, 0, 0, 0, -1;
    return ops;
}

namespace detail {
inline Matrix9cd kron(const Matrix3cd& a, const Matrix3cd& b) {
    Matrix9cd out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
    return out;
}
} // namespace detail

// full 9x9 ground-state Hamiltonian on the electron (x) nucleus product space
inline Matrix9cd build_lab_hamiltonian(const SpinParameters& p, const FieldConfig& f) {
    p.validate();
    const SpinOperators s = spin1_operators();
    const Matrix3cd id = Matrix3cd::Identity();
    const Matrix3cd sz2 = s.sz * s.sz;
    const Matrix3cd sx2my2 = s.sx * s.sx - s.sy * s.sy;
    const Matrix3cd sxsy = s.sx * s.sy + s.sy * s.sx;

    Matrix9cd h = Matrix9cd::Zero();
    h += (p.d0 + p.eps_par * f.sigma_par) * detail::kron(sz2, id);
    h += p.p_quad * detail::kron(id, sz2);
    h += p.a_par * detail::kron(s.sz, s.sz);
    h += p.gamma * f.b_par * detail::kron(s.sz, id);
    h += p.gamma * f.b_perp * detail::kron(s.sx, id);
    h += -p.eps_perp * f.sigma_x * detail::kron(sx2my2, id);
    h += p.eps_perp * f.sigma_y * detail::kron(sxsy, id);
    return h;
}

// closed-form level energy for B_perp = sigma_x = sigma_y = 0
inline double level_energy(const SpinParameters& p, const FieldConfig& f, int ms, int mi) {
    return (p.d0 + p.eps_par * f.sigma_par) * ms * ms + p.p_quad * mi * mi +
           p.a_par * mi * ms + p.gamma * f.b_par * ms;
}

enum class QubitPair { MinusPlus, ZeroMinus, PlusZero };

inline std::pair<int, int> pair_levels(QubitPair q) { // (upper ms, lower ms)
    switch (q) {
        case QubitPair::MinusPlus: return {+1, -1};
        case QubitPair::ZeroMinus: return {-1, 0};
        default: return {+1, 0};
    }
}

struct RotatingQubitHamiltonian {
    Matrix3cd h = Matrix3cd::Zero(); // rad/s, basis |+1>,|0>,|-1>
    QubitPair pair = QubitPair::MinusPlus;
    int m_i = 0;
    double delta = 0.0; // half-detuning carried on the diagonal
    double omega = 0.0; // resonant Rabi frequency; coupling element = omega/2
};

struct RwaPolicy {
    double detuning_fraction = 0.01; // warn when |2*delta| > fraction * drive
    double b_perp_fraction = 0.1;    // warn when gamma*B_perp > fraction * D0
};

namespace detail {
inline void warn(std::vector<std::string>* sink, const std::string& msg) {
    if (sink) sink->push_back(msg);
}
inline void check_rwa(const SpinParameters& p, const FieldConfig& f, double detuning,
                      double drive_freq, const RwaPolicy& policy,
                      std::vector<std::string>* warnings) {
    if (std::abs(detuning) > policy.detuning_fraction * drive_freq)
        warn(warnings, "rotating frame: detuning exceeds RWA validity bound");
    if (p.gamma * std::abs(f.b_perp) > policy.b_perp_fraction * p.d0)
        warn(warnings, "rotating frame: gamma*B_perp is not small against D0");
}
} // namespace detail

// stress drive near-resonant with the |-1> <-> |+1> splitting; diagonal
// detunings diag(delta, 0, -delta) with 2*delta = splitting - drive, coupling
// omega/2 between |+1> and |-1>. The |0> row and column stay zero: the stress
// term cannot move population through |0>.
inline RotatingQubitHamiltonian rotating_frame_mechanical(
    const SpinParameters& p, const FieldConfig& f, double drive_freq, int m_i,
    const RwaPolicy& policy = {}, std::vector<std::string>* warnings = nullptr) {
    p.validate();
    const double splitting = level_energy(p, f, +1, m_i) - level_energy(p, f, -1, m_i);
    const double detuning = splitting - drive_freq;
    const double omega = 2.0 * p.eps_perp * std::hypot(f.sigma_x, f.sigma_y);
    detail::check_rwa(p, f, detuning, drive_freq, policy, warnings);

    RotatingQubitHamiltonian out;
    out.pair = QubitPair::MinusPlus;
    out.m_i = m_i;
    out.delta = 0.5 * detuning;
    out.omega = omega;
    out.h(0, 0) = out.delta;
    out.h(2, 2) = -out.delta;
    out.h(0, 2) = out.h(2, 0) = 0.5 * omega;
    return out;
}

// magnetic drive on one of the dipole-allowed pairs; B_perp acts as the
// linear drive amplitude, so the resonant Rabi frequency carries the spin-1
// matrix element 1/sqrt(2)
inline RotatingQubitHamiltonian rotating_frame_magnetic(
    const SpinParameters& p, const FieldConfig& f, double drive_freq, QubitPair target,
    int m_i, const RwaPolicy& policy = {}, std::vector<std::string>* warnings = nullptr) {
    p.validate();
    if (target == QubitPair::MinusPlus)
        throw InvalidParameterError(
            "rotating_frame_magnetic: |-1><->|+1| is magnetically forbidden");
    const auto [up, lo] = pair_levels(target);
    const double splitting = level_energy(p, f, up, m_i) - level_energy(p, f, lo, m_i);
    const double detuning = splitting - drive_freq;
    const double omega = p.gamma * std::abs(f.b_perp) / std::sqrt(2.0);
    detail::check_rwa(p, f, detuning, drive_freq, policy, warnings);

    RotatingQubitHamiltonian out;
    out.pair = target;
    out.m_i = m_i;
    out.delta = 0.5 * detuning;
    out.omega = omega;
    const int a = level_index(up), b = level_index(lo);
    out.h(a, a) = out.delta;
    out.h(b, b) = -out.delta;
    out.h(a, b) = out.h(b, a) = 0.5 * omega;
    return out;
}

} // namespace nvmech
