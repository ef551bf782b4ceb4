#pragma once

#include <cmath>

#include "nvmech/errors.hpp"
#include "nvmech/units.hpp"

namespace nvmech {

// resonator amplitude ring time constant
inline double tau_ring(double omega_m, double quality) {
    if (omega_m <= 0.0 || quality <= 0.0)
        throw InvalidParameterError("tau_ring: omega_m and Q must be positive");
    return 2.0 * quality / omega_m;
}

// Normalized drive envelope of a gated resonator: 1-exp(-t/tau_r) while the
// drive voltage is on (t in [0,L]), exp(-(t-t0)/tau_r) afterwards. t0 is fixed
// by continuity at t = L, which resolves the ambiguous time argument in the
// ring-down reference formula. t = 0 is the leading edge of the drive voltage.
struct RingModel {
    double omega_m = 0.0; // rad/s
    double quality = 0.0;
    double tau_r = 0.0;   // s
    double length = 0.0;  // drive-on duration L, s
    double t0 = 0.0;      // ring-down reference time, s

    static RingModel create(double omega_m, double quality, double length) {
        if (length <= 0.0) throw InvalidParameterError("RingModel: L must be positive");
        RingModel r;
        r.omega_m = omega_m;
        r.quality = quality;
        r.tau_r = tau_ring(omega_m, quality);
        r.length = length;
        r.t0 = length + r.tau_r * std::log(1.0 - std::exp(-length / r.tau_r));
        return r;
    }

    double envelope(double t) const {
        if (t <= 0.0) return 0.0;
        if (t <= length) return 1.0 - std::exp(-t / tau_r);
        return std::exp(-(t - t0) / tau_r);
    }

    // integral of envelope over [0, t], closed form
    double cumulative_area(double t) const {
        if (t <= 0.0) return 0.0;
        if (t <= length) return t + tau_r * (std::exp(-t / tau_r) - 1.0);
        const double at_l = length + tau_r * (std::exp(-length / tau_r) - 1.0);
        const double peak = 1.0 - std::exp(-length / tau_r);
        return at_l + tau_r * (peak - std::exp(-(t - t0) / tau_r));
    }
};

inline double envelope(const RingModel& ring, double t) { return ring.envelope(t); }

// enclosed pulse area = integral of the normalized envelope; in square-pulse
// units this is the "normalized Rabi interval"
inline double pulse_area(const RingModel& ring, double t1, double t2) {
    if (t2 < t1) throw InvalidParameterError("pulse_area: t2 < t1");
    return ring.cumulative_area(t2) - ring.cumulative_area(t1);
}

// time after which the envelope stays below eps (used to bound propagation)
inline double ring_cutoff(const RingModel& ring, double eps = 1e-6) {
    return ring.t0 + ring.tau_r * std::log(1.0 / eps);
}

// locate the window start that maximizes pulse_area(t, t+window) via the
// stationarity condition envelope(t) = envelope(t+window) on the ring-up side
inline double optimal_window_start(const RingModel& ring, double window) {
    if (window <= 0.0) throw InvalidParameterError("optimal_window_start: window <= 0");
    double lo = 0.0, hi = ring.length;
    auto slope = [&](double t) { return ring.envelope(t) - ring.envelope(t + window); };
    // area'(t) = env(t+window) - env(t); the optimum has slope() == 0
    if (slope(lo) > 0.0) return lo;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct StandingWave {
    double omega_mech = 0.0; // antinode Rabi frequency, rad/s
    double lambda = 0.0;     // acoustic wavelength, m
};

inline double omega_at_depth(const StandingWave& w, double z) {
    if (z < 0.0) throw InvalidParameterError("omega_at_depth: z < 0");
    return w.omega_mech * std::abs(std::sin(units::two_pi * z / w.lambda));
}

} // namespace nvmech
