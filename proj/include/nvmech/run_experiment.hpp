#pragma once

// dispatch of parsed experiment configs; included at the end of experiments.hpp

namespace nvmech {

namespace detail {

inline SignalTrace with_abscissa_us(SignalTrace t) {
    for (auto& a : t.abscissa) a = units::s_to_us(a);
    return t;
}

inline std::string depth_tag(double z_um) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", z_um);
    std::string s(buf);
    for (auto& ch : s)
        if (ch == '.') ch = 'p';
    return s;
}

inline RamseyKind ramsey_kind_of(const std::string& kind, const std::string& qubit) {
    if (kind == "ramsey-mech") return RamseyKind::Mechanical;
    if (kind == "ramsey-dq") return RamseyKind::DoubleQuantum;
    if (kind == "ramsey-sq-plus") return RamseyKind::SingleQuantumPlusZero;
    if (kind == "hahn")
        return qubit == "sq-plus" ? RamseyKind::SingleQuantumPlusZero
                                  : RamseyKind::SingleQuantumZeroMinus;
    return RamseyKind::SingleQuantumZeroMinus;
}

} // namespace detail

inline RunArtifacts run_experiment(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir,
                                   int workers_override = 0) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const int workers = workers_override > 0 ? workers_override : cfg.workers;
    RunArtifacts art;
    auto emit_trace = [&](const SignalTrace& t, const std::string& name) {
        write_csv(t, (out_dir / name).string());
        art.files.push_back(name);
    };
    auto emit_json = [&](const json& j, const std::string& name) {
        write_text(out_dir / name, j.dump(2) + "\n");
        art.files.push_back(name);
    };

    const std::string& p = cfg.output_prefix;

    if (cfg.kind == "rabi-lowq" && cfg.readout_control) {
        ReadoutControlConfig rc;
        rc.tau_grid = cfg.time_grid->seconds();
        rc.omega = units::mhz_to_rad_s(cfg.rabi_mhz);
        rc.noise = cfg.noise->model();
        rc.fidelity_plus = cfg.readout_control->fidelity_plus;
        rc.fidelity_minus = cfg.readout_control->fidelity_minus;
        rc.weights = cfg.nuclear_weights;
        rc.shots = cfg.shots;
        rc.seed = cfg.seed;
        rc.workers = workers;
        auto [plus, minus] = readout_control_traces(rc);
        emit_trace(detail::with_abscissa_us(plus), p + "_plus_trace.csv");
        emit_trace(detail::with_abscissa_us(minus), p + "_minus_trace.csv");
    } else if (cfg.kind == "rabi-lowq") {
        EnsembleConfig ec;
        ec.wave = {units::mhz_to_rad_s(cfg.omega_mech_mhz), units::um_to_m(cfg.lambda_um)};
        ec.psf = {units::um_to_m(cfg.psf->z0_um), units::um_to_m(cfg.psf->fwhm0_um),
                  cfg.psf->slope};
        ec.noise = cfg.noise->model();
        ec.nuclear_factor = cfg.nuclear_factor;
        ec.shots = cfg.shots;
        ec.seed = cfg.seed;
        ec.workers = workers;
        emit_trace(detail::with_abscissa_us(rabi_average_lowq(ec, cfg.time_grid->seconds())),
                   p + "_trace.csv");
    } else if (cfg.kind == "rabi-highq" || cfg.kind == "depth-sweep") {
        const RingModel ring = cfg.ring->model();
        const double tau_mag = cfg.tau_mag_us > 0.0 ? units::us_to_s(cfg.tau_mag_us)
                                                    : ring.length + ring.tau_r;
        const auto tau0 = cfg.tau0_grid->seconds();
        emit_trace(detail::with_abscissa_us(window_area_curve(ring, tau0, tau_mag)),
                   p + "_area.csv");
        if (!cfg.area_only) {
            EnsembleConfig ec;
            ec.wave = {units::mhz_to_rad_s(cfg.omega_mech_mhz),
                       units::um_to_m(cfg.lambda_um)};
            ec.psf = {units::um_to_m(cfg.psf->z0_um), units::um_to_m(cfg.psf->fwhm0_um),
                      cfg.psf->slope};
            ec.noise = cfg.noise->model();
            ec.nuclear_factor = cfg.nuclear_factor;
            ec.shots = cfg.shots;
            ec.seed = cfg.seed;
            ec.workers = workers;
            if (cfg.kind == "rabi-highq") {
                emit_trace(detail::with_abscissa_us(
                               rabi_average_highq(ec, ring, tau0, tau_mag)),
                           p + "_trace.csv");
            } else {
                std::vector<double> depths;
                for (double z : cfg.depths_um) depths.push_back(units::um_to_m(z));
                const auto sweeps = depth_sweep(ec, ring, depths, tau0, tau_mag);
                for (std::size_t i = 0; i < sweeps.size(); ++i)
                    emit_trace(detail::with_abscissa_us(sweeps[i].trace),
                               p + "_z" + detail::depth_tag(cfg.depths_um[i]) +
                                   "um_trace.csv");
            }
        }
    } else if (cfg.kind.rfind("ramsey-", 0) == 0 || cfg.kind == "hahn") {
        ProtocolConfig pc;
        pc.kind = detail::ramsey_kind_of(cfg.kind, cfg.hahn_qubit);
        pc.tau_grid = cfg.tau_grid->seconds();
        pc.noise = cfg.noise->model();
        pc.delta_sys = units::khz_to_rad_s(cfg.drive_detuning_khz);
        pc.omega_rot = units::mhz_to_rad_s(cfg.omega_rot_mhz);
        pc.omega_mech = units::mhz_to_rad_s(cfg.rabi_mhz);
        pc.weights = cfg.nuclear_weights;
        pc.contrast_offset = cfg.contrast_offset;
        pc.contrast_scale = cfg.contrast_scale;
        pc.shots = cfg.shots;
        pc.seed = cfg.seed;
        pc.workers = workers;
        pc.echo = (cfg.kind == "hahn");
        emit_trace(detail::with_abscissa_us(protocol_trace(pc)), p + "_trace.csv");
    } else if (cfg.kind == "stress-convert") {
        const auto& s = *cfg.stress;
        const StiffnessMatrix c = build_stiffness(s.c11_gpa, s.c12_gpa, s.c44_gpa);
        const StressCouplings eps = strain_to_stress_couplings(
            StrainCouplings::from_ghz_per_strain(s.d_perp_ghz, s.d_par_ghz), c,
            nv_frame_rotation());
        json out = {{"eps_perp_mhz_per_mpa", eps.eps_perp_mhz_per_mpa()},
                    {"eps_par_mhz_per_mpa", eps.eps_par_mhz_per_mpa()},
                    {"d_perp_ghz_per_strain", s.d_perp_ghz},
                    {"d_par_ghz_per_strain", s.d_par_ghz},
                    {"c11_gpa", s.c11_gpa},
                    {"c12_gpa", s.c12_gpa},
                    {"c44_gpa", s.c44_gpa}};
        emit_json(out, p + "_stress.json");
    } else if (cfg.kind == "fit") {
        const SignalTrace raw = read_csv(cfg.input_csv);
        SignalTrace t = raw;
        for (auto& a : t.abscissa) a = units::us_to_s(a);
        FitOptions opt;
        opt.omega_rot = units::mhz_to_rad_s(cfg.omega_rot_mhz);
        const RamseyModelKind kind =
            cfg.fit_model == "eq4"
                ? RamseyModelKind::Mechanical
                : (cfg.fit_double_quantum ? RamseyModelKind::DoubleQuantum
                                          : RamseyModelKind::SingleQuantum);
        const FitResult fit = fit_ramsey(t, kind, opt);
        json out = {{"model", cfg.fit_model},
                    {"double_quantum", kind == RamseyModelKind::DoubleQuantum},
                    {"t2_star_us", units::s_to_us(fit.model.t2_star)},
                    {"t2_star_sigma_us", units::s_to_us(fit.sigma_t2())},
                    {"delta_khz", fit.model.delta / (units::two_pi * 1e3)},
                    {"delta_sigma_khz", fit.sigma_delta() / (units::two_pi * 1e3)},
                    {"a_par_mhz", units::rad_s_to_mhz(fit.model.a_par)},
                    {"omega_rot_mhz", units::rad_s_to_mhz(fit.model.omega_rot)},
                    {"amplitudes", fit.model.amplitude},
                    {"phases_rad", fit.model.phase},
                    {"ssr", fit.ssr},
                    {"converged", fit.converged},
                    {"iterations", fit.iterations}};
        emit_json(out, p + "_fit.json");
    } else if (cfg.kind == "spectrum") {
        const SignalTrace raw = read_csv(cfg.input_csv);
        SignalTrace t = raw;
        for (auto& a : t.abscissa) a = units::us_to_s(a);
        const PowerSpectrum ps = power_spectrum(t);
        std::string csv = "freq_mhz,power\n";
        for (std::size_t k = 0; k < ps.freq_hz.size(); ++k) {
            csv += detail::format_double(ps.freq_hz[k] * 1e-6);
            csv += ',';
            csv += detail::format_double(ps.power[k]);
            csv += '\n';
        }
        write_text(out_dir / (p + "_spectrum.csv"), csv);
        art.files.push_back(p + "_spectrum.csv");
    }

    emit_json(cfg.raw, p + "_config.json");
    char hash[24];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(cfg.raw.dump())));
    json manifest = {{"config_hash", std::string("fnv1a64:") + hash},
                     {"code_version", kVersion},
                     {"seed", cfg.seed},
                     {"created_utc", utc_timestamp()},
                     {"workers_requested", workers},
                     {"outputs", art.files}};
    write_text(out_dir / (p + "_manifest.json"), manifest.dump(2) + "\n");
    art.files.push_back(p + "_manifest.json");
    return art;
}

} // namespace nvmech
