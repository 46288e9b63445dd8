#pragma once

// Signal field synthesis and spectral diagnostics.
//
// Fields are complex analytic signals with the carrier kept explicitly,
// E(tau) = envelope * exp(-i w0 tau). A component exp(-i w tau) is reported
// at the positive angular frequency w.

#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "molmem/grid.hpp"

namespace molmem::field {

using cplx = std::complex<double>;

struct SignalSpec {
    double amplitude = 0.0;      // E0, a.u.
    double fwhm = 0.0;           // sigma_s, FWHM of |E|, a.u.
    double center_time = 0.0;    // t0, a.u.
    double carrier_omega = 0.0;  // w0, a.u.

    void validate() const;
};

struct FieldGrid {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<cplx> samples;
    double carrier_omega = 0.0;  // carrier used at synthesis

    std::size_t size() const { return samples.size(); }
    double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
    TimeGrid grid() const { return {t0, dt, samples.size()}; }
};

// Largest sample spacing that still resolves a carrier: one twentieth of its period.
double max_carrier_step(double carrier_omega);

// Throws ConfigError if the grid under-resolves the carrier or does not
// cover t0 +- 3 sigma_s.
FieldGrid make_signal(const SignalSpec& spec, const TimeGrid& grid);

struct Spectrum {
    std::vector<double> omega;     // ascending angular frequency, a.u.
    std::vector<cplx> amplitude;   // sum |A|^2 d_omega equals sum |E|^2 d_tau
    double d_omega = 0.0;

    std::vector<double> magnitude() const;
    double energy() const;
    // Intensity-weighted mean frequency over omega > 0.
    double centroid() const;
};

Spectrum spectrum(const FieldGrid& field);

// Rows of `values` follow `axis` (z or tau); columns follow `omega`.
struct SpectrogramMap {
    std::string axis_name;
    std::vector<double> axis;
    std::vector<double> omega;
    std::vector<std::vector<double>> values;
};

// Window length for the short-time analysis: Gaussian FWHM of four signal
// durations, hop of a quarter window.
inline constexpr double spectrogram_window_factor = 4.0;

// Frequency content of each z slice, restricted to [omega_min, omega_max].
// Each slice is weighted by a Gaussian window of FWHM 4 * signal_fwhm
// centred on the slice's intensity centroid.
SpectrogramMap spectrogram(std::span<const FieldGrid> history, std::span<const double> z_positions,
                           double signal_fwhm, double omega_min, double omega_max);

// Short-time spectrum of a single field: omega versus tau.
SpectrogramMap short_time_spectrogram(const FieldGrid& field, double signal_fwhm, double omega_min,
                                      double omega_max);

// Mean spacing between adjacent spectral maxima above 10% of the peak,
// searched within [omega_min, omega_max]. Throws std::domain_error when
// fewer than three maxima are found.
double fringe_spacing(const Spectrum& spec, double omega_min = 0.0,
                      double omega_max = std::numeric_limits<double>::infinity());

}  // namespace molmem::field
