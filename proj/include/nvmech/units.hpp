#pragma once

#include <cmath>
#include <numbers>

// Unit policy: angular frequencies in rad/s, times in seconds, stress in Pa,
// magnetic field in gauss (gamma is stored per gauss). Config files and CLI
// flags carry explicit unit suffixes ("_mhz", "_us", "_mpa", "_g") and are
// converted here at the boundary.
namespace nvmech::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// "x_mhz" config values are f/2pi in MHz
inline constexpr double mhz_to_rad_s(double f_mhz) { return two_pi * f_mhz * 1e6; }
inline constexpr double rad_s_to_mhz(double w) { return w / (two_pi * 1e6); }
inline constexpr double khz_to_rad_s(double f_khz) { return two_pi * f_khz * 1e3; }
inline constexpr double ghz_to_rad_s(double f_ghz) { return two_pi * f_ghz * 1e9; }

inline constexpr double us_to_s(double t_us) { return t_us * 1e-6; }
inline constexpr double s_to_us(double t_s) { return t_s * 1e6; }
inline constexpr double um_to_m(double z_um) { return z_um * 1e-6; }
inline constexpr double m_to_um(double z_m) { return z_m * 1e6; }

inline constexpr double gpa_to_pa(double p) { return p * 1e9; }
inline constexpr double mpa_to_pa(double p) { return p * 1e6; }
inline constexpr double pa_to_mpa(double p) { return p * 1e-6; }

} // namespace nvmech::units
