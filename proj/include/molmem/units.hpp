#pragma once

// Physical constants and lab-unit conversions. All internal physics runs in
// atomic units (hbar = e = m_e = 1).

#include <numbers>

namespace molmem::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double speed_of_light = 137.035999084;       // a.u.
inline constexpr double fs_per_au = 0.024188843265857;        // atomic time unit in fs
inline constexpr double ev_per_hartree = 27.211386245988;
inline constexpr double wavenumber_per_hartree = 219474.6313632;  // cm^-1
inline constexpr double bohr_cm = 0.529177210903e-8;
inline constexpr double bohr_angstrom = 0.529177210903;
inline constexpr double boltzmann_hartree_per_kelvin = 3.166811563e-6;
// Intensity (W/cm^2) of a field whose peak amplitude is one atomic unit.
inline constexpr double intensity_au_w_cm2 = 3.50944758e16;

constexpr double fs_to_au(double t_fs) { return t_fs / fs_per_au; }
constexpr double au_to_fs(double t_au) { return t_au * fs_per_au; }
constexpr double ps_to_au(double t_ps) { return fs_to_au(1000.0 * t_ps); }

constexpr double ev_to_au(double e_ev) { return e_ev / ev_per_hartree; }
constexpr double au_to_ev(double e_au) { return e_au * ev_per_hartree; }

constexpr double wavenumber_to_au(double k_cm) { return k_cm / wavenumber_per_hartree; }
constexpr double au_to_wavenumber(double e_au) { return e_au * wavenumber_per_hartree; }

constexpr double cm_to_au(double x_cm) { return x_cm / bohr_cm; }
constexpr double au_to_cm(double x_au) { return x_au * bohr_cm; }

constexpr double angstrom3_to_au(double v) {
    return v / (bohr_angstrom * bohr_angstrom * bohr_angstrom);
}
constexpr double au_to_angstrom3(double v) {
    return v * bohr_angstrom * bohr_angstrom * bohr_angstrom;
}

// number density, cm^-3 -> bohr^-3
constexpr double per_cm3_to_au(double n) { return n * bohr_cm * bohr_cm * bohr_cm; }
constexpr double au_to_per_cm3(double n) { return n / (bohr_cm * bohr_cm * bohr_cm); }

// Angular frequency of a vacuum wavelength given in nm.
constexpr double wavelength_nm_to_omega(double lambda_nm) {
    return two_pi * speed_of_light / (lambda_nm * 1e-7 / bohr_cm);
}

// Peak field amplitude for a peak intensity in W/cm^2.
double intensity_to_field(double intensity_w_cm2);

constexpr double kelvin_to_au(double temperature_k) {
    return temperature_k * boltzmann_hartree_per_kelvin;
}

}  // namespace molmem::units
