#pragma once

#include <string>
#include <vector>

namespace nvmech {

struct BundledConfig {
    std::string name;
    std::string description;
    std::string json_text;
};

// canned experiment definitions reproducing the published model curves; the
// catalog is a stable compile-time table
inline const std::vector<BundledConfig>& bundled_configs() {
    static const std::vector<BundledConfig> catalog = {
        {"fig2b",
         "low-Q mechanical Rabi trace (fig. 2b parameters: 1.0 MHz drive, 19.9 um wave, "
         "18 um focal depth)",
         R"({
  "experiment": "rabi-lowq",
  "description": "spatially averaged mechanical Rabi oscillations, low-Q device",
  "seed": 771,
  "output_prefix": "fig2b",
  "omega_mech_mhz": 1.0,
  "lambda_um": 19.9,
  "psf": {"z0_um": 18.0, "fwhm0_um": 1.0, "fwhm_slope": 0.25},
  "noise": {"kind": "gaussian-detuning", "t2_star_us": 0.45},
  "nuclear_factor": 0.3333333333333333,
  "shots": 200,
  "time_grid_us": {"start_us": 0.0, "stop_us": 3.0, "points": 241}
})"},
        {"fig3b",
         "high-Q swept pi-pulse-pair Rabi trace (fig. 3b parameters: 3.8 MHz drive, "
         "529 MHz / Q=4000 mode)",
         R"({
  "experiment": "rabi-highq",
  "description": "window-gated Rabi oscillations through the ringing resonator",
  "seed": 529,
  "output_prefix": "fig3b",
  "omega_mech_mhz": 3.8,
  "lambda_um": 29.6,
  "ring": {"omega_m_mhz": 529.0, "quality_factor": 4000, "pulse_length_us": 3.0},
  "tau_mag_us": 0.0,
  "psf": {"z0_um": 5.9, "fwhm0_um": 1.0, "fwhm_slope": 0.25},
  "noise": {"kind": "gaussian-detuning", "t2_star_us": 0.68},
  "nuclear_factor": 0.414,
  "shots": 200,
  "tau0_grid_us": {"start_us": -4.0, "stop_us": 12.0, "points": 121}
})"},
        {"fig3c",
         "depth sweep of window-gated Rabi oscillations vs normalized Rabi interval "
         "(fig. 3c)",
         R"({
  "experiment": "depth-sweep",
  "description": "window-gated Rabi oscillations at several focal depths",
  "seed": 3400,
  "output_prefix": "fig3c",
  "omega_mech_mhz": 3.8,
  "lambda_um": 29.6,
  "ring": {"omega_m_mhz": 529.0, "quality_factor": 4000, "pulse_length_us": 3.0},
  "tau_mag_us": 0.0,
  "psf": {"z0_um": 7.4, "fwhm0_um": 1.0, "fwhm_slope": 0.25},
  "noise": {"kind": "gaussian-detuning", "t2_star_us": 0.68},
  "nuclear_factor": 0.414,
  "shots": 200,
  "depths_um": [7.4, 11.1, 13.3, 14.1],
  "tau0_grid_us": {"start_us": -4.0, "stop_us": 8.0, "points": 97}
})"},
        {"fig4a",
         "mechanical Ramsey coherence trace (fig. 4a: T2*=0.45 us, detuning 830 kHz, "
         "3.5 MHz readout rotation)",
         R"({
  "experiment": "ramsey-mech",
  "description": "two-branch mechanical Ramsey measurement, exponential ensemble envelope",
  "seed": 4001,
  "output_prefix": "fig4a",
  "rabi_mhz": 1.0,
  "drive_detuning_khz": 830,
  "omega_rot_mhz": 3.5,
  "noise": {"kind": "exponential-envelope", "t2_star_us": 0.45},
  "contrast_offset": 20000,
  "contrast_scale": 5000,
  "tau_grid_us": {"start_us": 0.0, "stop_us": 3.0, "points": 601}
})"},
        {"fig4b",
         "magnetic double-quantum Ramsey coherence trace (fig. 4b: T2*=0.36 us, "
         "detuning 140 kHz)",
         R"({
  "experiment": "ramsey-dq",
  "description": "multipulse {-1,+1} Ramsey through |0>, exponential ensemble envelope",
  "seed": 4002,
  "output_prefix": "fig4b",
  "drive_detuning_khz": 140,
  "noise": {"kind": "exponential-envelope", "t2_star_us": 0.36},
  "contrast_offset": 20000,
  "contrast_scale": 5000,
  "tau_grid_us": {"start_us": 0.0, "stop_us": 2.5, "points": 801}
})"},
        {"fig4c",
         "magnetic {0,-1} Ramsey coherence trace (fig. 4c: T2*=0.91 us, detuning 350 kHz)",
         R"({
  "experiment": "ramsey-sq-minus",
  "description": "single-quantum Ramsey, exponential ensemble envelope",
  "seed": 4003,
  "output_prefix": "fig4c",
  "drive_detuning_khz": 350,
  "noise": {"kind": "exponential-envelope", "t2_star_us": 0.91},
  "contrast_offset": 20000,
  "contrast_scale": 5000,
  "tau_grid_us": {"start_us": 0.0, "stop_us": 4.0, "points": 801}
})"},
        {"fig4d",
         "magnetic {+1,0} Ramsey coherence trace (fig. 4d: T2*=0.92 us, detuning 17 kHz)",
         R"({
  "experiment": "ramsey-sq-plus",
  "description": "single-quantum Ramsey, exponential ensemble envelope",
  "seed": 4004,
  "output_prefix": "fig4d",
  "drive_detuning_khz": 17,
  "noise": {"kind": "exponential-envelope", "t2_star_us": 0.92},
  "contrast_offset": 20000,
  "contrast_scale": 5000,
  "tau_grid_us": {"start_us": 0.0, "stop_us": 4.0, "points": 801}
})"},
        {"figS1",
         "readout-path control: square mechanical Rabi read out through |+1> vs |-1> "
         "adiabatic passages (fig. S1)",
         R"({
  "experiment": "rabi-lowq",
  "description": "same drive, two readout paths; amplitudes differ only by passage fidelity",
  "seed": 101,
  "output_prefix": "figS1",
  "rabi_mhz": 1.0,
  "noise": {"kind": "gaussian-detuning", "t2_star_us": 0.45},
  "readout_control": {"fidelity_plus": 0.95, "fidelity_minus": 0.85},
  "shots": 200,
  "time_grid_us": {"start_us": 0.0, "stop_us": 3.0, "points": 121}
})"},
        {"figS2c",
         "enclosed mechanical pulse area between the pi-pulse pair vs window delay "
         "(fig. S2c)",
         R"({
  "experiment": "rabi-highq",
  "description": "window area curve only; no spin propagation",
  "seed": 1,
  "output_prefix": "figS2c",
  "area_only": true,
  "ring": {"omega_m_mhz": 529.0, "quality_factor": 4000, "pulse_length_us": 3.0},
  "tau_mag_us": 0.0,
  "tau0_grid_us": {"start_us": -6.0, "stop_us": 14.0, "points": 401}
})"},
        {"figS4",
         "magnetic Hahn echo sequence on the {0,-1} qubit (fig. S4); quasi-static noise "
         "refocuses exactly",
         R"({
  "experiment": "hahn",
  "description": "echo amplitude vs free-evolution time under quasi-static detuning noise",
  "seed": 404,
  "output_prefix": "figS4",
  "drive_detuning_khz": 0,
  "noise": {"kind": "gaussian-detuning", "t2_star_us": 0.91},
  "shots": 100,
  "tau_grid_us": {"start_us": 0.0, "stop_us": 2.0, "points": 41}
})"},
        {"stress-convert",
         "strain-to-stress coupling conversion from the measured couplings and the "
         "diamond stiffness constants",
         R"({
  "experiment": "stress-convert",
  "description": "rotate couplings to the lattice frame, apply inverse stiffness, rotate back",
  "seed": 1,
  "output_prefix": "stress_convert",
  "stress": {
    "d_perp_ghz_per_strain": 21.5,
    "d_par_ghz_per_strain": 13.3,
    "c11_gpa": 1076.4,
    "c12_gpa": 125.2,
    "c44_gpa": 577.4
  }
})"}};
    return catalog;
}

inline const BundledConfig* find_bundled(const std::string& name) {
    for (const auto& b : bundled_configs())
        if (b.name == name) return &b;
    return nullptr;
}

} // namespace nvmech
