#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "nvmech/errors.hpp"
#include "nvmech/levmar.hpp"
#include "nvmech/signal_trace.hpp"
#include "nvmech/units.hpp"

namespace nvmech {

// ---------------------------------------------------------------------------
// Ramsey models
// ---------------------------------------------------------------------------

enum class RamseyModelKind { SingleQuantum, DoubleQuantum, Mechanical };

// three-cosine hyperfine model with an exponential ensemble envelope; the
// double-quantum qubit sees twice the hyperfine splitting, the mechanical
// qubit drives a single sublevel and carries the artificial omega_rot phase
struct RamseyModel {
    RamseyModelKind kind = RamseyModelKind::SingleQuantum;
    double t2_star = 1e-6;                    // s
    double delta = 0.0;                       // rad/s
    std::array<double, 3> amplitude{0, 0, 0}; // mechanical uses [0] only
    std::array<double, 3> phase{0, 0, 0};
    double a_par = units::mhz_to_rad_s(-2.166);
    double omega_rot = 0.0;                   // rad/s, mechanical only

    int n_components() const { return kind == RamseyModelKind::Mechanical ? 1 : 3; }

    std::array<double, 3> frequencies() const {
        switch (kind) {
            case RamseyModelKind::SingleQuantum:
                return {delta + a_par, delta, delta - a_par};
            case RamseyModelKind::DoubleQuantum:
                return {delta + 2.0 * a_par, delta, delta - 2.0 * a_par};
            default:
                return {delta + omega_rot, 0.0, 0.0};
        }
    }
};

inline double ramsey_model_eval(const RamseyModel& m, double t) {
    if (m.t2_star <= 0.0) throw InvalidParameterError("RamseyModel: T2* must be positive");
    const auto w = m.frequencies();
    double y = 0.0;
    for (int i = 0; i < m.n_components(); ++i)
        y += m.amplitude[i] * std::cos(w[i] * t + m.phase[i]);
    return std::exp(-t / m.t2_star) * y;
}

// ---------------------------------------------------------------------------
// power spectrum
// ---------------------------------------------------------------------------

struct PowerSpectrum {
    std::vector<double> freq_hz; // one-sided
    std::vector<double> power;   // |X_k|^2 of the windowed, zero-padded series
    std::size_t n_padded = 0;
    double dt = 0.0;
    double windowed_energy = 0.0; // sum |x_n|^2 after windowing (Parseval anchor)

    double bin_hz() const { return 1.0 / (dt * static_cast<double>(n_padded)); }
};

enum class SpectrumWindow { Hann, None };

inline PowerSpectrum power_spectrum(const SignalTrace& trace,
                                    SpectrumWindow window = SpectrumWindow::Hann,
                                    int zero_pad_factor = 8) {
    const std::size_t n = trace.size();
    if (n < 4) throw InvalidParameterError("power_spectrum: trace too short");
    if (zero_pad_factor < 1) throw InvalidParameterError("power_spectrum: pad factor >= 1");
    const double dt = trace.abscissa[1] - trace.abscissa[0];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double step = trace.abscissa[i + 1] - trace.abscissa[i];
        if (std::abs(step - dt) > 1e-9 * std::max(std::abs(dt), 1e-30))
            throw InvalidParameterError("power_spectrum: non-uniform time grid");
    }

    const double mean =
        std::accumulate(trace.mean.begin(), trace.mean.end(), 0.0) / static_cast<double>(n);
    std::size_t npad = 1;
    while (npad < n * static_cast<std::size_t>(zero_pad_factor)) npad <<= 1;

    std::vector<double> x(npad, 0.0);
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = 1.0;
        if (window == SpectrumWindow::Hann)
            w = 0.5 - 0.5 * std::cos(units::two_pi * static_cast<double>(i) /
                                     static_cast<double>(n - 1));
        x[i] = (trace.mean[i] - mean) * w;
        energy += x[i] * x[i];
    }

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, x);

    PowerSpectrum out;
    out.n_padded = npad;
    out.dt = dt;
    out.windowed_energy = energy;
    const std::size_t half = npad / 2;
    out.freq_hz.resize(half + 1);
    out.power.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        out.freq_hz[k] = static_cast<double>(k) / (dt * static_cast<double>(npad));
        out.power[k] = std::norm(spec[k]);
    }
    return out;
}

// indices of local maxima above threshold_factor * median power
inline std::vector<std::size_t> find_peaks(const PowerSpectrum& s,
                                           double threshold_factor = 5.0) {
    std::vector<double> sorted = s.power;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double thresh = threshold_factor * median;
    std::vector<std::size_t> peaks;
    for (std::size_t k = 1; k + 1 < s.power.size(); ++k)
        if (s.power[k] > thresh && s.power[k] >= s.power[k - 1] &&
            s.power[k] > s.power[k + 1])
            peaks.push_back(k);
    return peaks;
}

inline double band_power(const PowerSpectrum& s, double f_lo, double f_hi) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.freq_hz.size(); ++k)
        if (s.freq_hz[k] >= f_lo && s.freq_hz[k] <= f_hi) acc += s.power[k];
    return acc;
}

// ---------------------------------------------------------------------------
// two-branch Ramsey normalization
// ---------------------------------------------------------------------------

// Im[rho_ij] = (y+ - y-) / (2 (y_NP - y_pi)); affine-invariant in the raw counts
inline double normalize_ramsey(double y_plus, double y_minus, double y_np, double y_pi) {
    const double den = y_np - y_pi;
    if (den == 0.0)
        throw NumericalError("normalize_ramsey: degenerate normalization (y_NP == y_pi)");
    return 0.5 * (y_plus - y_minus) / den;
}

// ---------------------------------------------------------------------------
// Ramsey fitting
// ---------------------------------------------------------------------------

struct FitResult {
    RamseyModel model;
    std::vector<double> sigma;   // 1-sigma uncertainties, same order as pack()
    double ssr = 0.0;
    bool converged = false;
    int iterations = 0;
    std::string message;

    double sigma_t2() const { return sigma.empty() ? 0.0 : sigma[0]; }
    double sigma_delta() const { return sigma.size() > 1 ? sigma[1] : 0.0; }
};

struct FitOptions {
    double a_par = units::mhz_to_rad_s(-2.166); // fixed during the fit
    double omega_rot = 0.0;                     // mechanical model only
    double delta_scan_max = units::mhz_to_rad_s(1.0);
    int delta_scan_points = 96;
    int t2_scan_points = 24;
    double t2_scan_min = 5e-8, t2_scan_max = 5e-6;
    LevMarOptions levmar{};
};

namespace detail {

inline int pack_size(RamseyModelKind kind) {
    return kind == RamseyModelKind::Mechanical ? 4 : 8;
}

inline Eigen::VectorXd pack(const RamseyModel& m) {
    Eigen::VectorXd x(pack_size(m.kind));
    x(0) = m.t2_star;
    x(1) = m.delta;
    const int nc = m.n_components();
    for (int i = 0; i < nc; ++i) {
        x(2 + i) = m.amplitude[i];
        x(2 + nc + i) = m.phase[i];
    }
    return x;
}

inline RamseyModel unpack(const Eigen::VectorXd& x, const RamseyModel& proto) {
    RamseyModel m = proto;
    m.t2_star = x(0);
    m.delta = x(1);
    const int nc = m.n_components();
    for (int i = 0; i < nc; ++i) {
        m.amplitude[i] = x(2 + i);
        m.phase[i] = x(2 + nc + i);
    }
    return m;
}

// residuals r = model - y with the analytic Jacobian of the damped-cosine sum
inline void ramsey_residuals(const RamseyModel& proto, const std::vector<double>& t,
                             const std::vector<double>& y, const Eigen::VectorXd& x,
                             Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const RamseyModel m = unpack(x, proto);
    const auto w = m.frequencies();
    const int nc = m.n_components();
    const double t2 = m.t2_star;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double ti = t[i];
        const double env = std::exp(-ti / t2);
        double val = 0.0;
        jac.row(static_cast<int>(i)).setZero();
        double ddelta = 0.0;
        for (int c = 0; c < nc; ++c) {
            const double arg = w[c] * ti + m.phase[c];
            const double cosv = std::cos(arg), sinv = std::sin(arg);
            val += m.amplitude[c] * cosv;
            jac(static_cast<int>(i), 2 + c) = env * cosv;
            jac(static_cast<int>(i), 2 + nc + c) = -env * m.amplitude[c] * sinv;
            ddelta += -m.amplitude[c] * sinv * ti;
        }
        r(static_cast<int>(i)) = env * val - y[i];
        jac(static_cast<int>(i), 0) = env * val * ti / (t2 * t2);
        jac(static_cast<int>(i), 1) = env * ddelta;
    }
}

// linear least squares for the in-phase/quadrature amplitudes at fixed
// (delta, T2); returns SSR and the recovered (amplitude, phase) pairs
inline double varpro_ssr(const RamseyModel& proto, const std::vector<double>& t,
                         const std::vector<double>& y, double delta, double t2,
                         std::array<double, 3>* amps = nullptr,
                         std::array<double, 3>* phases = nullptr) {
    RamseyModel m = proto;
    m.delta = delta;
    m.t2_star = t2;
    const auto w = m.frequencies();
    const int nc = m.n_components();
    Eigen::MatrixXd design(t.size(), 2 * nc);
    Eigen::VectorXd rhs(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double env = std::exp(-t[i] / t2);
        for (int c = 0; c < nc; ++c) {
            design(static_cast<int>(i), 2 * c) = env * std::cos(w[c] * t[i]);
            design(static_cast<int>(i), 2 * c + 1) = env * std::sin(w[c] * t[i]);
        }
        rhs(static_cast<int>(i)) = y[i];
    }
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
    const double ssr = (design * coef - rhs).squaredNorm();
    if (amps && phases) {
        for (int c = 0; c < nc; ++c) {
            (*amps)[c] = std::hypot(coef(2 * c), coef(2 * c + 1));
            (*phases)[c] = std::atan2(-coef(2 * c + 1), coef(2 * c));
        }
    }
    return ssr;
}

} // namespace detail

// Damped nonlinear least squares on the Ramsey models. The (delta, T2*)
// starting point comes from a coarse variable-projection scan seeded by the
// dominant spectrum peak; amplitudes and phases then start from the linear
// subproblem, which keeps the polish step out of the mirrored local minima
// that plague this model family at small detuning.
inline FitResult fit_ramsey(const SignalTrace& trace, RamseyModelKind kind,
                            const FitOptions& opt = {}) {
    RamseyModel proto;
    proto.kind = kind;
    proto.a_par = opt.a_par;
    proto.omega_rot = opt.omega_rot;

    const int np = detail::pack_size(kind);
    if (static_cast<int>(trace.size()) < 4 * np)
        throw InvalidParameterError("fit_ramsey: need at least 4x as many points as parameters");

    double spread = 0.0;
    for (double v : trace.mean)
        spread = std::max(spread, std::abs(v - trace.mean.front()));
    if (spread < 1e-12)
        throw NumericalError("fit_ramsey: flat data, fit is rank-deficient");

    // decimate for the coarse scan; polish uses every point
    std::vector<double> t_scan, y_scan;
    const std::size_t stride = std::max<std::size_t>(1, trace.size() / 1024);
    for (std::size_t i = 0; i < trace.size(); i += stride) {
        t_scan.push_back(trace.abscissa[i]);
        y_scan.push_back(trace.mean[i]);
    }

    // candidate detunings: uniform coarse grid plus spectrum-peak seeds
    std::vector<double> candidates;
    for (int i = 0; i < opt.delta_scan_points; ++i)
        candidates.push_back(opt.delta_scan_max * (i + 0.5) / opt.delta_scan_points);
    try {
        const PowerSpectrum ps = power_spectrum(trace);
        for (std::size_t k : find_peaks(ps)) {
            const double w_pk = units::two_pi * ps.freq_hz[k];
            if (kind == RamseyModelKind::Mechanical) {
                const double cand = w_pk - opt.omega_rot;
                candidates.push_back(std::abs(cand));
            } else {
                candidates.push_back(w_pk); // delta line
                const double a_eff = std::abs(opt.a_par) *
                                     (kind == RamseyModelKind::DoubleQuantum ? 2.0 : 1.0);
                candidates.push_back(std::abs(w_pk - a_eff)); // hyperfine lines
            }
        }
    } catch (const InvalidParameterError&) {
        // non-uniform grid: fall back to the plain scan
    }

    double best_ssr = std::numeric_limits<double>::infinity();
    double best_delta = 0.0, best_t2 = opt.t2_scan_min;
    for (double cand : candidates) {
        for (int j = 0; j < opt.t2_scan_points; ++j) {
            const double t2 = opt.t2_scan_min *
                              std::pow(opt.t2_scan_max / opt.t2_scan_min,
                                       static_cast<double>(j) / (opt.t2_scan_points - 1));
            const double ssr = detail::varpro_ssr(proto, t_scan, y_scan, cand, t2);
            if (ssr < best_ssr) {
                best_ssr = ssr;
                best_delta = cand;
                best_t2 = t2;
            }
        }
    }

    std::array<double, 3> amps{}, phases{};
    detail::varpro_ssr(proto, t_scan, y_scan, best_delta, best_t2, &amps, &phases);
    RamseyModel init = proto;
    init.delta = best_delta;
    init.t2_star = best_t2;
    init.amplitude = amps;
    init.phase = phases;

    const auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
        detail::ramsey_residuals(proto, trace.abscissa, trace.mean, x, r, jac);
    };
    const LevMarResult lm = levmar_fit(fn, detail::pack(init),
                                       static_cast<int>(trace.size()), opt.levmar);

    FitResult out;
    out.model = detail::unpack(lm.x, proto);
    out.ssr = lm.ssr;
    out.converged = lm.converged;
    out.iterations = lm.iterations;
    out.message = lm.message;
    out.sigma.resize(np);
    for (int i = 0; i < np; ++i)
        out.sigma[i] = std::sqrt(std::max(lm.covariance(i, i), 0.0));
    // canonical sign conventions: positive T2*, positive amplitudes
    if (out.model.t2_star < 0.0) out.model.t2_star = -out.model.t2_star;
    for (int i = 0; i < out.model.n_components(); ++i) {
        if (out.model.amplitude[i] < 0.0) {
            out.model.amplitude[i] = -out.model.amplitude[i];
            out.model.phase[i] += std::numbers::pi;
        }
        out.model.phase[i] = std::remainder(out.model.phase[i], units::two_pi);
    }
    return out;
}

} // namespace nvmech
