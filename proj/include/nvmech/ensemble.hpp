#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "nvmech/errors.hpp"
#include "nvmech/parallel.hpp"
#include "nvmech/pulse_engine.hpp"
#include "nvmech/resonator.hpp"
#include "nvmech/rng.hpp"
#include "nvmech/signal_trace.hpp"

namespace nvmech {

// Gaussian depth profile of the confocal collection volume; the width grows
// linearly with the focal depth. fwhm0 and slope are required inputs, there
// is no physical default.
struct PSFModel {
    double z0 = 0.0;    // focal depth, m
    double fwhm0 = 0.0; // m
    double slope = 0.0; // dimensionless

    double fwhm() const {
        const double w = fwhm0 + slope * z0;
        if (w <= 0.0) throw InvalidParameterError("PSFModel: FWHM must be positive");
        return w;
    }
};

inline double psf_weight(const PSFModel& psf, double z) {
    const double sigma = psf.fwhm() / 2.354820045030949; // FWHM -> sigma
    const double u = (z - psf.z0) / sigma;
    return std::exp(-0.5 * u * u);
}

struct EnsembleConfig {
    StandingWave wave;
    PSFModel psf;
    NoiseModel noise;
    double nuclear_factor = 1.0 / 3.0; // 1/3 for an unpolarized drive-one-sublevel
                                       // measurement, measured C otherwise
    int shots = 200;
    std::uint64_t seed = 1;
    int workers = 0;
    PropagationSettings prop{1e-7, 12, 1e-6}; // MC noise dominates; looser ODE tol
};

namespace detail {

// PSF-weighted mean of fn(z) over [max(0, z0-3w), z0+3w]; the Gaussian tail
// beyond 3 FWHM contributes < 1e-4. The quadrature tolerance sits well below
// the Monte-Carlo noise of the surrounding ensemble average.
inline double psf_average(const PSFModel& psf, const std::function<double(double)>& fn,
                          double rel_tol = 1e-3, int max_depth = 5) {
    using quad = boost::math::quadrature::gauss_kronrod<double, 15>;
    const double w = psf.fwhm();
    const double lo = std::max(0.0, psf.z0 - 3.0 * w);
    const double hi = psf.z0 + 3.0 * w;
    double err = 0.0;
    const double num = quad::integrate(
        [&](double z) { return psf_weight(psf, z) * fn(z); }, lo, hi,
        static_cast<unsigned>(max_depth), rel_tol, &err);
    const double den =
        quad::integrate([&](double z) { return psf_weight(psf, z); }, lo, hi, 8, 1e-9);
    if (!std::isfinite(num) || !std::isfinite(den) || den <= 0.0)
        throw NumericalError("psf_average: quadrature failed to converge");
    return num / den;
}

inline void fold_shots(SignalTrace& trace, const std::vector<std::vector<double>>& shots,
                       double scale) {
    const std::size_t n = trace.abscissa.size();
    const std::size_t m = shots.size();
    trace.mean.assign(n, 0.0);
    trace.stderr_.assign(n, 0.0);
    for (const auto& s : shots)
        for (std::size_t i = 0; i < n; ++i) trace.mean[i] += s[i];
    for (std::size_t i = 0; i < n; ++i) trace.mean[i] /= static_cast<double>(m);
    if (m > 1) {
        for (const auto& s : shots)
            for (std::size_t i = 0; i < n; ++i) {
                const double d = s[i] - trace.mean[i];
                trace.stderr_[i] += d * d;
            }
        for (std::size_t i = 0; i < n; ++i)
            trace.stderr_[i] =
                scale * std::sqrt(trace.stderr_[i] / (static_cast<double>(m - 1) *
                                                      static_cast<double>(m)));
    }
    for (std::size_t i = 0; i < n; ++i) trace.mean[i] *= scale;
}

} // namespace detail

// square-drive Rabi signal averaged over the standing wave (PSF quadrature)
// and the quasi-static detuning draw (Monte Carlo):
// P(t) = factor * < Omega(z)^2/(Omega^2+delta^2) sin^2(sqrt(Omega^2+delta^2) t/2) >
inline SignalTrace rabi_average_lowq(const EnsembleConfig& cfg,
                                     const std::vector<double>& t_grid) {
    if (cfg.shots < 1) throw InvalidParameterError("rabi_average_lowq: shots >= 1");
    SignalTrace trace;
    trace.abscissa = t_grid;
    auto shot_trace = [&](std::size_t s) {
        const double delta = draw_detuning(cfg.noise, mix_seed(cfg.seed, s));
        std::vector<double> vals(t_grid.size());
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            const double t = t_grid[i];
            vals[i] = detail::psf_average(cfg.psf, [&](double z) {
                const double om = omega_at_depth(cfg.wave, z);
                const double g2 = om * om + delta * delta;
                if (g2 == 0.0) return 0.0;
                const double s2 = std::sin(0.5 * std::sqrt(g2) * t);
                return om * om / g2 * s2 * s2;
            });
        }
        return vals;
    };
    const auto shots =
        parallel_map<std::vector<double>>(cfg.shots, cfg.workers, shot_trace);
    detail::fold_shots(trace, shots, cfg.nuclear_factor);
    return trace;
}

// swept-window Rabi signal for the gated ringing drive (numerical window
// propagation, PSF quadrature, Monte Carlo over the detuning draw)
inline SignalTrace rabi_average_highq(const EnsembleConfig& cfg, const RingModel& ring,
                                      const std::vector<double>& tau0_grid,
                                      double tau_mag) {
    if (cfg.shots < 1) throw InvalidParameterError("rabi_average_highq: shots >= 1");
    SignalTrace trace;
    trace.abscissa = tau0_grid;
    auto shot_trace = [&](std::size_t s) {
        const double delta = draw_detuning(cfg.noise, mix_seed(cfg.seed, s));
        std::vector<double> vals(tau0_grid.size());
        for (std::size_t i = 0; i < tau0_grid.size(); ++i) {
            const double t1 = tau0_grid[i];
            vals[i] = detail::psf_average(cfg.psf, [&](double z) {
                const double om = omega_at_depth(cfg.wave, z);
                return mechanical_window_transfer(ring, om, delta, t1, t1 + tau_mag,
                                                  cfg.prop);
            });
        }
        return vals;
    };
    const auto shots =
        parallel_map<std::vector<double>>(cfg.shots, cfg.workers, shot_trace);
    detail::fold_shots(trace, shots, cfg.nuclear_factor);
    return trace;
}

// window area for every tau0 in square-pulse units (normalized Rabi interval)
inline SignalTrace window_area_curve(const RingModel& ring,
                                     const std::vector<double>& tau0_grid, double tau_mag) {
    SignalTrace t;
    t.abscissa = tau0_grid;
    t.mean.reserve(tau0_grid.size());
    for (double tau0 : tau0_grid)
        t.mean.push_back(pulse_area(ring, std::max(tau0, 0.0),
                                    std::max(tau0 + tau_mag, 0.0)));
    t.stderr_.assign(tau0_grid.size(), 0.0);
    return t;
}

struct DepthTrace {
    double z0 = 0.0;
    SignalTrace trace; // abscissa = enclosed pulse area (normalized Rabi interval)
};

// fixed-window sweeps at several focal depths, plotted against enclosed area
inline std::vector<DepthTrace> depth_sweep(const EnsembleConfig& cfg, const RingModel& ring,
                                           const std::vector<double>& depths,
                                           const std::vector<double>& tau0_grid,
                                           double tau_mag) {
    std::vector<DepthTrace> out;
    out.reserve(depths.size());
    for (double z0 : depths) {
        EnsembleConfig c = cfg;
        c.psf.z0 = z0;
        DepthTrace d;
        d.z0 = z0;
        d.trace = rabi_average_highq(c, ring, tau0_grid, tau_mag);
        for (std::size_t i = 0; i < d.trace.abscissa.size(); ++i)
            d.trace.abscissa[i] = pulse_area(ring, std::max(tau0_grid[i], 0.0),
                                             std::max(tau0_grid[i] + tau_mag, 0.0));
        out.push_back(std::move(d));
    }
    return out;
}

// affine fluorescence model mapping the |0> population to detected signal
inline double contrast_map(double p0, double offset, double contrast) {
    return offset + contrast * p0;
}

} // namespace nvmech
