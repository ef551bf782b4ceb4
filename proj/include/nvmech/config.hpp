#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvmech/errors.hpp"
#include "nvmech/pulse_engine.hpp"
#include "nvmech/units.hpp"

namespace nvmech {

using json = nlohmann::json;

class ConfigError : public InvalidParameterError {
public:
    ConfigError(std::string field, const std::string& msg)
        : InvalidParameterError(field + ": " + msg), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

namespace cfgdetail {

inline void check_keys(const json& j, const std::string& path,
                       const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(path.empty() ? it.key() : path + "." + it.key(),
                              "unknown field");
}

inline const json& require(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key))
        throw ConfigError(path.empty() ? key : path + "." + key, "required field missing");
    return j.at(key);
}

inline double require_number(const json& j, const std::string& path, const std::string& key) {
    const json& v = require(j, path, key);
    if (!v.is_number())
        throw ConfigError(path.empty() ? key : path + "." + key, "must be a number");
    return v.get<double>();
}

inline double optional_number(const json& j, const std::string& path, const std::string& key,
                              double fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number())
        throw ConfigError(path.empty() ? key : path + "." + key, "must be a number");
    return v.get<double>();
}

inline std::string require_string(const json& j, const std::string& path,
                                  const std::string& key) {
    const json& v = require(j, path, key);
    if (!v.is_string())
        throw ConfigError(path.empty() ? key : path + "." + key, "must be a string");
    return v.get<std::string>();
}

} // namespace cfgdetail

struct GridSpec {
    double start_us = 0.0;
    double stop_us = 0.0;
    int points = 0;

    std::vector<double> seconds() const {
        std::vector<double> g(points);
        for (int i = 0; i < points; ++i)
            g[i] = units::us_to_s(start_us + (stop_us - start_us) * i /
                                  std::max(points - 1, 1));
        return g;
    }
    std::vector<double> micros() const {
        std::vector<double> g(points);
        for (int i = 0; i < points; ++i)
            g[i] = start_us + (stop_us - start_us) * i / std::max(points - 1, 1);
        return g;
    }

    static GridSpec parse(const json& j, const std::string& path) {
        cfgdetail::check_keys(j, path, {"start_us", "stop_us", "points"});
        GridSpec g;
        g.start_us = cfgdetail::require_number(j, path, "start_us");
        g.stop_us = cfgdetail::require_number(j, path, "stop_us");
        const double pts = cfgdetail::require_number(j, path, "points");
        g.points = static_cast<int>(pts);
        if (g.points < 2 || g.stop_us <= g.start_us)
            throw ConfigError(path, "grid needs points >= 2 and stop_us > start_us");
        return g;
    }
};

struct NoiseSpec {
    NoiseModel::Kind kind = NoiseModel::Kind::GaussianDetuning;
    double t2_star_us = 0.0;

    NoiseModel model() const { return {kind, units::us_to_s(t2_star_us)}; }

    static NoiseSpec parse(const json& j, const std::string& path) {
        cfgdetail::check_keys(j, path, {"kind", "t2_star_us"});
        NoiseSpec n;
        const std::string kind = j.contains("kind")
                                     ? cfgdetail::require_string(j, path, "kind")
                                     : "gaussian-detuning";
        if (kind == "gaussian-detuning") n.kind = NoiseModel::Kind::GaussianDetuning;
        else if (kind == "exponential-envelope") n.kind = NoiseModel::Kind::ExponentialEnvelope;
        else throw ConfigError(path + ".kind", "must be gaussian-detuning or exponential-envelope");
        n.t2_star_us = cfgdetail::require_number(j, path, "t2_star_us");
        if (n.t2_star_us <= 0.0) throw ConfigError(path + ".t2_star_us", "must be positive");
        return n;
    }
};

struct PsfSpec {
    double z0_um = 0.0, fwhm0_um = 0.0, slope = 0.0;

    static PsfSpec parse(const json& j, const std::string& path) {
        cfgdetail::check_keys(j, path, {"z0_um", "fwhm0_um", "fwhm_slope"});
        PsfSpec p;
        p.z0_um = cfgdetail::require_number(j, path, "z0_um");
        p.fwhm0_um = cfgdetail::require_number(j, path, "fwhm0_um");
        p.slope = cfgdetail::require_number(j, path, "fwhm_slope");
        if (p.z0_um < 0.0) throw ConfigError(path + ".z0_um", "must be >= 0");
        if (p.fwhm0_um + p.slope * p.z0_um <= 0.0)
            throw ConfigError(path + ".fwhm0_um", "resulting FWHM must be positive");
        return p;
    }
};

struct RingSpec {
    double omega_m_mhz = 0.0;
    double quality = 0.0;
    double pulse_length_us = 0.0;

    RingModel model() const {
        return RingModel::create(units::mhz_to_rad_s(omega_m_mhz), quality,
                                 units::us_to_s(pulse_length_us));
    }

    static RingSpec parse(const json& j, const std::string& path) {
        cfgdetail::check_keys(j, path, {"omega_m_mhz", "quality_factor", "pulse_length_us"});
        RingSpec r;
        r.omega_m_mhz = cfgdetail::require_number(j, path, "omega_m_mhz");
        r.quality = cfgdetail::require_number(j, path, "quality_factor");
        r.pulse_length_us = cfgdetail::require_number(j, path, "pulse_length_us");
        if (r.omega_m_mhz <= 0 || r.quality <= 0 || r.pulse_length_us <= 0)
            throw ConfigError(path, "ring parameters must be positive");
        return r;
    }
};

struct StressConvertSpec {
    double d_perp_ghz = 0.0, d_par_ghz = 0.0;
    double c11_gpa = 0.0, c12_gpa = 0.0, c44_gpa = 0.0;

    static StressConvertSpec parse(const json& j, const std::string& path) {
        cfgdetail::check_keys(j, path,
                              {"d_perp_ghz_per_strain", "d_par_ghz_per_strain", "c11_gpa",
                               "c12_gpa", "c44_gpa"});
        StressConvertSpec s;
        s.d_perp_ghz = cfgdetail::require_number(j, path, "d_perp_ghz_per_strain");
        s.d_par_ghz = cfgdetail::require_number(j, path, "d_par_ghz_per_strain");
        s.c11_gpa = cfgdetail::require_number(j, path, "c11_gpa");
        s.c12_gpa = cfgdetail::require_number(j, path, "c12_gpa");
        s.c44_gpa = cfgdetail::require_number(j, path, "c44_gpa");
        return s;
    }
};

struct ReadoutControlSpec {
    double fidelity_plus = 1.0;
    double fidelity_minus = 1.0;

    static ReadoutControlSpec parse(const json& j, const std::string& path) {
        cfgdetail::check_keys(j, path, {"fidelity_plus", "fidelity_minus"});
        ReadoutControlSpec r;
        r.fidelity_plus = cfgdetail::require_number(j, path, "fidelity_plus");
        r.fidelity_minus = cfgdetail::require_number(j, path, "fidelity_minus");
        if (r.fidelity_plus < 0 || r.fidelity_plus > 1 || r.fidelity_minus < 0 ||
            r.fidelity_minus > 1)
            throw ConfigError(path, "fidelities must lie in [0,1]");
        return r;
    }
};

struct ExperimentConfig {
    std::string kind;
    std::uint64_t seed = 1;
    std::string output_prefix;
    int workers = 0;
    int shots = 200;

    double omega_mech_mhz = 0.0; // antinode stress Rabi frequency
    double lambda_um = 0.0;
    double rabi_mhz = 0.0;            // single-spin drive for sequence protocols
    double nuclear_factor = 1.0 / 3.0;
    std::array<double, 3> nuclear_weights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double drive_detuning_khz = 0.0; // systematic detuning of the Ramsey drive
    double omega_rot_mhz = 0.0;
    double contrast_offset = 0.0; // affine fluorescence model
    double contrast_scale = 1.0;
    double tau_mag_us = 0.0; // 0 -> auto (L + tau_r)
    bool area_only = false;

    std::optional<PsfSpec> psf;
    std::optional<NoiseSpec> noise;
    std::optional<RingSpec> ring;
    std::optional<GridSpec> time_grid, tau0_grid, tau_grid;
    std::vector<double> depths_um;
    std::optional<StressConvertSpec> stress;
    std::optional<ReadoutControlSpec> readout_control;

    std::string input_csv;  // fit / spectrum kinds
    std::string fit_model;  // "eq3" | "eq4"
    bool fit_double_quantum = false;
    std::string hahn_qubit = "sq-minus";

    json raw; // canonical echo for provenance
};

inline const std::set<std::string>& experiment_kinds() {
    static const std::set<std::string> kinds = {
        "rabi-lowq",  "rabi-highq",     "depth-sweep", "ramsey-mech",
        "ramsey-dq",  "ramsey-sq-minus", "ramsey-sq-plus", "hahn",
        "stress-convert", "fit",        "spectrum"};
    return kinds;
}

inline ExperimentConfig parse_experiment_config(const json& j) {
    if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
    cfgdetail::check_keys(
        j, "",
        {"experiment", "seed", "output_prefix", "workers", "shots", "omega_mech_mhz",
         "lambda_um", "rabi_mhz", "nuclear_factor", "nuclear_weights", "drive_detuning_khz",
         "omega_rot_mhz", "contrast_offset", "contrast_scale", "tau_mag_us", "area_only",
         "psf", "noise", "ring", "time_grid_us", "tau0_grid_us", "tau_grid_us", "depths_um",
         "stress", "readout_control", "input_csv", "fit_model", "fit_double_quantum",
         "qubit", "description"});

    ExperimentConfig c;
    c.raw = j;
    c.kind = cfgdetail::require_string(j, "", "experiment");
    if (!experiment_kinds().count(c.kind))
        throw ConfigError("experiment", "unknown experiment kind '" + c.kind + "'");

    c.seed = static_cast<std::uint64_t>(cfgdetail::optional_number(j, "", "seed", 1));
    c.output_prefix = j.contains("output_prefix")
                          ? cfgdetail::require_string(j, "", "output_prefix")
                          : c.kind;
    c.workers = static_cast<int>(cfgdetail::optional_number(j, "", "workers", 0));
    c.shots = static_cast<int>(cfgdetail::optional_number(j, "", "shots", 200));
    if (c.shots < 1) throw ConfigError("shots", "must be >= 1");

    c.omega_mech_mhz = cfgdetail::optional_number(j, "", "omega_mech_mhz", 0.0);
    c.lambda_um = cfgdetail::optional_number(j, "", "lambda_um", 0.0);
    c.rabi_mhz = cfgdetail::optional_number(j, "", "rabi_mhz", 0.0);
    c.nuclear_factor = cfgdetail::optional_number(j, "", "nuclear_factor", 1.0 / 3.0);
    c.drive_detuning_khz = cfgdetail::optional_number(j, "", "drive_detuning_khz", 0.0);
    c.omega_rot_mhz = cfgdetail::optional_number(j, "", "omega_rot_mhz", 0.0);
    c.contrast_offset = cfgdetail::optional_number(j, "", "contrast_offset", 0.0);
    c.contrast_scale = cfgdetail::optional_number(j, "", "contrast_scale", 1.0);
    c.tau_mag_us = cfgdetail::optional_number(j, "", "tau_mag_us", 0.0);
    c.area_only = j.contains("area_only") && j.at("area_only").is_boolean()
                      ? j.at("area_only").get<bool>()
                      : false;

    if (j.contains("nuclear_weights")) {
        const json& w = j.at("nuclear_weights");
        if (!w.is_array() || w.size() != 3)
            throw ConfigError("nuclear_weights", "must be an array of 3 numbers");
        double sum = 0.0;
        for (int i = 0; i < 3; ++i) {
            c.nuclear_weights[i] = w[i].get<double>();
            if (c.nuclear_weights[i] < 0.0)
                throw ConfigError("nuclear_weights", "weights must be >= 0");
            sum += c.nuclear_weights[i];
        }
        if (sum > 1.0 + 1e-12) throw ConfigError("nuclear_weights", "weights must sum to <= 1");
    }

    if (j.contains("psf")) c.psf = PsfSpec::parse(j.at("psf"), "psf");
    if (j.contains("noise")) c.noise = NoiseSpec::parse(j.at("noise"), "noise");
    if (j.contains("ring")) c.ring = RingSpec::parse(j.at("ring"), "ring");
    if (j.contains("time_grid_us"))
        c.time_grid = GridSpec::parse(j.at("time_grid_us"), "time_grid_us");
    if (j.contains("tau0_grid_us"))
        c.tau0_grid = GridSpec::parse(j.at("tau0_grid_us"), "tau0_grid_us");
    if (j.contains("tau_grid_us"))
        c.tau_grid = GridSpec::parse(j.at("tau_grid_us"), "tau_grid_us");
    if (j.contains("stress")) c.stress = StressConvertSpec::parse(j.at("stress"), "stress");
    if (j.contains("readout_control"))
        c.readout_control =
            ReadoutControlSpec::parse(j.at("readout_control"), "readout_control");
    if (j.contains("depths_um")) {
        const json& d = j.at("depths_um");
        if (!d.is_array() || d.empty())
            throw ConfigError("depths_um", "must be a non-empty array");
        for (const auto& v : d) c.depths_um.push_back(v.get<double>());
    }
    if (j.contains("input_csv")) c.input_csv = cfgdetail::require_string(j, "", "input_csv");
    if (j.contains("fit_model")) {
        c.fit_model = cfgdetail::require_string(j, "", "fit_model");
        if (c.fit_model != "eq3" && c.fit_model != "eq4")
            throw ConfigError("fit_model", "must be eq3 or eq4");
    }
    if (j.contains("fit_double_quantum"))
        c.fit_double_quantum = j.at("fit_double_quantum").get<bool>();
    if (j.contains("qubit")) {
        c.hahn_qubit = cfgdetail::require_string(j, "", "qubit");
        if (c.hahn_qubit != "sq-minus" && c.hahn_qubit != "sq-plus")
            throw ConfigError("qubit", "must be sq-minus or sq-plus");
    }

    // per-kind required sections
    auto need = [&](bool ok, const std::string& field, const std::string& why) {
        if (!ok) throw ConfigError(field, "required for experiment '" + c.kind + "' (" + why + ")");
    };
    if (c.kind == "rabi-lowq") {
        if (c.readout_control) {
            need(c.rabi_mhz > 0, "rabi_mhz", "single-spin drive strength");
            need(c.time_grid.has_value(), "time_grid_us", "pulse-length sweep");
            need(c.noise.has_value(), "noise", "dephasing model");
        } else {
            need(c.omega_mech_mhz > 0, "omega_mech_mhz", "standing-wave amplitude");
            need(c.lambda_um > 0, "lambda_um", "standing-wave wavelength");
            need(c.psf.has_value(), "psf", "depth averaging");
            need(c.noise.has_value(), "noise", "dephasing model");
            need(c.time_grid.has_value(), "time_grid_us", "pulse-length sweep");
        }
    } else if (c.kind == "rabi-highq" || c.kind == "depth-sweep") {
        need(c.ring.has_value(), "ring", "resonator envelope");
        need(c.tau0_grid.has_value(), "tau0_grid_us", "window sweep");
        if (!c.area_only) {
            need(c.omega_mech_mhz > 0, "omega_mech_mhz", "standing-wave amplitude");
            need(c.lambda_um > 0, "lambda_um", "standing-wave wavelength");
            need(c.psf.has_value(), "psf", "depth averaging");
            need(c.noise.has_value(), "noise", "dephasing model");
        }
        if (c.kind == "depth-sweep")
            need(!c.depths_um.empty(), "depths_um", "focal depth list");
    } else if (c.kind.rfind("ramsey-", 0) == 0 || c.kind == "hahn") {
        need(c.tau_grid.has_value(), "tau_grid_us", "free-evolution sweep");
        need(c.noise.has_value(), "noise", "dephasing model");
        if (c.kind == "ramsey-mech")
            need(c.rabi_mhz > 0, "rabi_mhz", "mechanical pi/2 length");
    } else if (c.kind == "stress-convert") {
        need(c.stress.has_value(), "stress", "couplings and stiffness constants");
    } else if (c.kind == "fit") {
        need(!c.input_csv.empty(), "input_csv", "trace to fit");
        need(!c.fit_model.empty(), "fit_model", "eq3 or eq4");
    } else if (c.kind == "spectrum") {
        need(!c.input_csv.empty(), "input_csv", "trace to transform");
    }
    return c;
}

} // namespace nvmech
