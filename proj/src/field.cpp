#include "molmem/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "molmem/errors.hpp"
#include "molmem/fft.hpp"
#include "molmem/units.hpp"

namespace molmem::field {

namespace {
const double four_ln2 = 4.0 * std::log(2.0);

std::vector<double> gaussian_window(const FieldGrid& f, double center, double fwhm) {
    std::vector<double> w(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double x = (f.time(k) - center) / fwhm;
        w[k] = std::exp(-four_ln2 * x * x);
    }
    return w;
}

// Magnitudes of `s` on [omega_min, omega_max], with the matching axis.
void band(const Spectrum& s, double omega_min, double omega_max, std::vector<double>& omega,
          std::vector<double>& mag) {
    omega.clear();
    mag.clear();
    for (std::size_t k = 0; k < s.omega.size(); ++k) {
        if (s.omega[k] >= omega_min && s.omega[k] <= omega_max) {
            omega.push_back(s.omega[k]);
            mag.push_back(std::abs(s.amplitude[k]));
        }
    }
}
}  // namespace

void SignalSpec::validate() const {
    if (!(fwhm > 0.0)) throw ConfigError("signal duration must be positive");
    if (!(carrier_omega > 0.0)) throw ConfigError("signal carrier frequency must be positive");
}

double max_carrier_step(double carrier_omega) { return units::two_pi / carrier_omega / 20.0; }

FieldGrid make_signal(const SignalSpec& spec, const TimeGrid& grid) {
    spec.validate();
    if (grid.dt > max_carrier_step(spec.carrier_omega) * (1.0 + 1e-12)) {
        throw ConfigError("time step " + std::to_string(units::au_to_fs(grid.dt)) +
                          " fs does not resolve the signal carrier (need <= " +
                          std::to_string(units::au_to_fs(max_carrier_step(spec.carrier_omega))) + " fs)");
    }
    if (grid.t0 > spec.center_time - 3.0 * spec.fwhm || grid.t_end() < spec.center_time + 3.0 * spec.fwhm) {
        throw ConfigError("time grid does not cover the signal centre +- 3 durations");
    }
    FieldGrid f{grid.t0, grid.dt, std::vector<cplx>(grid.size), spec.carrier_omega};
    for (std::size_t k = 0; k < grid.size; ++k) {
        const double t = grid.time(k);
        const double x = (t - spec.center_time) / spec.fwhm;
        f.samples[k] = spec.amplitude * std::exp(-four_ln2 * x * x) * std::polar(1.0, -spec.carrier_omega * t);
    }
    return f;
}

std::vector<double> Spectrum::magnitude() const {
    std::vector<double> m(amplitude.size());
    std::transform(amplitude.begin(), amplitude.end(), m.begin(), [](cplx a) { return std::abs(a); });
    return m;
}

double Spectrum::energy() const {
    double s = 0.0;
    for (const auto& a : amplitude) s += std::norm(a);
    return s * d_omega;
}

double Spectrum::centroid() const {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < omega.size(); ++k) {
        if (omega[k] <= 0.0) continue;
        num += omega[k] * std::norm(amplitude[k]);
        den += std::norm(amplitude[k]);
    }
    return den > 0.0 ? num / den : 0.0;
}

Spectrum spectrum(const FieldGrid& field) {
    const std::size_t n = field.size();
    Spectrum s;
    if (n == 0) return s;
    std::vector<cplx> raw(n);
    Fft fft(n);
    fft.backward(field.samples.data(), raw.data());

    const double scale = field.dt / std::sqrt(units::two_pi);
    s.d_omega = units::two_pi / (static_cast<double>(n) * field.dt);
    s.omega.resize(n);
    s.amplitude.resize(n);
    const std::size_t first_negative = (n + 1) / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = (i + first_negative) % n;
        const double w = fft_frequency(k, n, field.dt);
        s.omega[i] = w;
        s.amplitude[i] = scale * raw[k] * std::polar(1.0, w * field.t0);
    }
    return s;
}

SpectrogramMap spectrogram(std::span<const FieldGrid> history, std::span<const double> z_positions,
                           double signal_fwhm, double omega_min, double omega_max) {
    if (history.size() < 2) throw std::invalid_argument("spectrogram needs at least two slices");
    if (z_positions.size() != history.size()) throw std::invalid_argument("one z position per slice required");
    SpectrogramMap map;
    map.axis_name = "z";
    map.axis.assign(z_positions.begin(), z_positions.end());
    const double width = spectrogram_window_factor * signal_fwhm;
    for (const auto& slice : history) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < slice.size(); ++k) {
            num += slice.time(k) * std::norm(slice.samples[k]);
            den += std::norm(slice.samples[k]);
        }
        const double center = den > 0.0 ? num / den : 0.5 * (slice.t0 + slice.time(slice.size() - 1));
        const auto w = gaussian_window(slice, center, width);
        FieldGrid windowed = slice;
        for (std::size_t k = 0; k < slice.size(); ++k) windowed.samples[k] *= w[k];
        std::vector<double> mag;
        band(spectrum(windowed), omega_min, omega_max, map.omega, mag);
        map.values.push_back(std::move(mag));
    }
    return map;
}

SpectrogramMap short_time_spectrogram(const FieldGrid& field, double signal_fwhm, double omega_min,
                                      double omega_max) {
    SpectrogramMap map;
    map.axis_name = "tau";
    const double width = spectrogram_window_factor * signal_fwhm;
    const double hop = width / 4.0;
    const double t_end = field.time(field.size() - 1);
    for (double c = field.t0; c <= t_end + 1e-9 * hop; c += hop) {
        const auto w = gaussian_window(field, c, width);
        FieldGrid windowed = field;
        for (std::size_t k = 0; k < field.size(); ++k) windowed.samples[k] *= w[k];
        std::vector<double> mag;
        band(spectrum(windowed), omega_min, omega_max, map.omega, mag);
        map.axis.push_back(c);
        map.values.push_back(std::move(mag));
    }
    return map;
}

double fringe_spacing(const Spectrum& spec, double omega_min, double omega_max) {
    std::vector<double> omega, mag;
    band(spec, omega_min, omega_max, omega, mag);
    if (mag.size() < 3) throw std::domain_error("spectrum band too narrow for fringe detection");
    const double peak = *std::max_element(mag.begin(), mag.end());
    std::vector<double> maxima;
    for (std::size_t i = 1; i + 1 < mag.size(); ++i) {
        if (mag[i] > mag[i - 1] && mag[i] >= mag[i + 1] && mag[i] >= 0.1 * peak) {
            // parabolic refinement of the maximum position
            const double a = mag[i - 1], b = mag[i], c = mag[i + 1];
            const double denom = a - 2.0 * b + c;
            const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
            maxima.push_back(omega[i] + shift * (omega[i + 1] - omega[i]));
        }
    }
    if (maxima.size() < 3) {
        throw std::domain_error("found " + std::to_string(maxima.size()) +
                                " spectral maxima above 10% of peak; need at least 3 for a fringe spacing");
    }
    return (maxima.back() - maxima.front()) / static_cast<double>(maxima.size() - 1);
}

}  // namespace molmem::field
