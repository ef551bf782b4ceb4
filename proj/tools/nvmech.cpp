// Batch front end: run bundled or user experiment configs, validate configs,
// fit Ramsey traces, compute power spectra.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nvmech/experiments.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

nvmech::json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw nvmech::ConfigError(path, "cannot open config file");
    nvmech::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw nvmech::ConfigError(path, std::string("invalid JSON: ") + e.what());
    }
    return j;
}

nvmech::ExperimentConfig resolve_config(const std::string& name_or_path) {
    if (const nvmech::BundledConfig* b = nvmech::find_bundled(name_or_path))
        return nvmech::parse_experiment_config(nvmech::json::parse(b->json_text));
    return nvmech::parse_experiment_config(load_json_file(name_or_path));
}

std::string default_out_dir() {
    const char* env = std::getenv("NVMECH_OUT");
    return env && *env ? env : ".";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-resonator experiment simulator and analysis toolkit"};
    app.require_subcommand(1);

    std::string config_arg, out_dir = default_out_dir();
    int workers = 0;
    auto* run = app.add_subcommand("run", "run an experiment config (bundled name or path)");
    run->add_option("config", config_arg, "bundled config name or JSON file path")->required();
    run->add_option("--out", out_dir, "output directory (default $NVMECH_OUT or .)");
    run->add_option("--workers", workers, "worker threads (default: all cores)");

    auto* list = app.add_subcommand("list", "list bundled experiment configs");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "validate a config file");
    validate->add_option("config", validate_path, "JSON config file path")->required();

    std::string fit_csv, fit_model = "eq3";
    double fit_omega_rot_mhz = 0.0, fit_a_par_mhz = -2.166;
    bool fit_dq = false;
    auto* fit = app.add_subcommand("fit", "fit a Ramsey trace CSV");
    fit->add_option("trace", fit_csv, "trace CSV (abscissa in us)")->required();
    fit->add_option("--model", fit_model, "eq3 (hyperfine triplet) or eq4 (single line)")
        ->check(CLI::IsMember({"eq3", "eq4"}));
    fit->add_flag("--dq", fit_dq, "double-quantum qubit (doubles the hyperfine splitting)");
    fit->add_option("--omega-rot-mhz", fit_omega_rot_mhz, "eq4 readout rotation frequency");
    fit->add_option("--a-par-mhz", fit_a_par_mhz, "fixed hyperfine constant (default -2.166)");
    fit->add_option("--out", out_dir, "output directory");

    std::string spec_csv;
    auto* spectrum = app.add_subcommand("spectrum", "power spectrum of a trace CSV");
    spectrum->add_option("trace", spec_csv, "trace CSV (abscissa in us)")->required();
    spectrum->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const nvmech::ExperimentConfig cfg = resolve_config(config_arg);
            const nvmech::RunArtifacts art = nvmech::run_experiment(cfg, out_dir, workers);
            for (const auto& f : art.files) std::cout << f << "\n";
            return 0;
        }
        if (*list) {
            for (const auto& b : nvmech::bundled_configs())
                std::cout << b.name << "\t" << b.description << "\n";
            return 0;
        }
        if (*validate) {
            nvmech::parse_experiment_config(load_json_file(validate_path));
            std::cout << "ok\n";
            return 0;
        }
        if (*fit) {
            nvmech::json j = {{"experiment", "fit"},
                              {"input_csv", fit_csv},
                              {"fit_model", fit_model},
                              {"fit_double_quantum", fit_dq},
                              {"omega_rot_mhz", fit_omega_rot_mhz},
                              {"output_prefix", "fit"}};
            nvmech::ExperimentConfig cfg = nvmech::parse_experiment_config(j);
            const nvmech::RunArtifacts art = nvmech::run_experiment(cfg, out_dir, workers);
            for (const auto& f : art.files) std::cout << f << "\n";
            return 0;
        }
        if (*spectrum) {
            nvmech::json j = {{"experiment", "spectrum"},
                              {"input_csv", spec_csv},
                              {"output_prefix", "spectrum"}};
            nvmech::ExperimentConfig cfg = nvmech::parse_experiment_config(j);
            const nvmech::RunArtifacts art = nvmech::run_experiment(cfg, out_dir, workers);
            for (const auto& f : art.files) std::cout << f << "\n";
            return 0;
        }
    } catch (const nvmech::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nvmech::InvalidParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nvmech::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
