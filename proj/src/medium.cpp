#include "molmem/medium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "molmem/errors.hpp"
#include "molmem/units.hpp"

namespace molmem {

mb::AtomSpec mb::AtomSpec::from_lab(double wavelength_nm, double dipole_ea0, double t1_fs, double t2_fs) {
    AtomSpec a;
    a.transition_omega = units::wavelength_nm_to_omega(wavelength_nm);
    a.dipole = dipole_ea0;
    a.t1 = units::fs_to_au(t1_fs);
    a.t2 = units::fs_to_au(t2_fs);
    return a;
}

void mb::AtomSpec::validate() const {
    if (!(transition_omega > 0.0)) throw ConfigError("atomic transition frequency must be positive");
    if (!(dipole >= 0.0)) throw ConfigError("transition dipole must be real and non-negative");
    if (!(t1 > 0.0) || !(t2 > 0.0)) throw ConfigError("relaxation times must be positive");
}

namespace medium {

double MediumSpec::susceptibility_scale() const {
    return units::two_pi * molecular_density * (molecule.alpha_perp + molecule.delta_alpha);
}

double MediumSpec::baseline_index() const {
    return 1.0 + units::two_pi * molecular_density * (molecule.alpha_perp + molecule.delta_alpha / 3.0);
}

void MediumSpec::validate() const {
    molecule.validate();
    atom.validate();
    if (!(molecular_density >= 0.0) || !(atomic_density >= 0.0)) {
        throw ConfigError("number densities must be non-negative");
    }
}

std::vector<std::string> MediumSpec::warnings() const {
    std::vector<std::string> out;
    if (susceptibility_scale() > 0.1) {
        std::ostringstream msg;
        msg << "molecular susceptibility scale 2 pi N_m (alpha_perp + delta_alpha) = " << susceptibility_scale()
            << " is not small; the dilute index model is questionable";
        out.push_back(msg.str());
    }
    return out;
}

IndexTrace index_trace(const rotor::AlignmentTrace& alignment, const MediumSpec& medium) {
    IndexTrace out;
    out.t0 = alignment.t0;
    out.dt = alignment.dt;
    const double scale = units::two_pi * medium.molecular_density;
    out.n_values.resize(alignment.values.size());
    for (std::size_t k = 0; k < alignment.values.size(); ++k) {
        out.n_values[k] = 1.0 + scale * (medium.molecule.alpha_perp + medium.molecule.delta_alpha * alignment.values[k]);
    }
    out.n0 = medium.baseline_index();
    out.pump_frame_velocity = units::speed_of_light / out.n0;
    return out;
}

namespace {

// Running least-squares sums, with abscissa and ordinate measured from a
// local origin to limit cancellation.
struct LineFit {
    double x0, y0;
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;

    void add(double x, double y) {
        x -= x0;
        y -= y0;
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double slope() const { return (n * sxy - sx * sy) / (n * sxx - sx * sx); }
    double rms_residual() const {
        const double cxx = sxx - sx * sx / n;
        const double cxy = sxy - sx * sy / n;
        const double cyy = syy - sy * sy / n;
        return std::sqrt(std::max(0.0, cyy - cxy * cxy / cxx) / n);
    }
    // Fitted ordinate at x.
    double at(double x) const {
        const double b = slope();
        return y0 + (sy - b * sx) / n + b * (x - x0);
    }
};

std::size_t index_at_or_after(const IndexTrace& index, double t) {
    const double k = std::ceil((t - index.t0) / index.dt - 1e-9);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(index.n_values.size())));
}

}  // namespace

RampSegment extract_ramp(const IndexTrace& index, double t_start, double t_end) {
    if (!(t_end > t_start)) throw ConfigError("ramp window must have t_end > t_start");
    if (t_start < index.t0 - 1e-9 * index.dt || t_end > index.time(index.n_values.size() - 1) + 1e-9 * index.dt) {
        throw ConfigError("ramp window lies outside the index trace");
    }
    const std::size_t lo = index_at_or_after(index, t_start);
    std::size_t hi = index_at_or_after(index, t_end);
    if (hi < index.n_values.size() && index.time(hi) <= t_end + 1e-9 * index.dt) ++hi;
    if (hi < lo + 3) throw ConfigError("ramp window holds fewer than 3 samples");

    LineFit fit{index.time(lo), index.n_values[lo]};
    for (std::size_t k = lo; k < hi; ++k) fit.add(index.time(k), index.n_values[k]);
    RampSegment r;
    r.t_start = index.time(lo);
    r.t_end = index.time(hi - 1);
    r.slope = fit.slope();
    r.intercept = fit.at(r.t_start);
    r.residual = fit.rms_residual();
    return r;
}

RampSegment find_ramp(const IndexTrace& index, double search_begin, double search_end, int sign,
                      double residual_fraction) {
    const std::size_t lo = index_at_or_after(index, search_begin);
    const std::size_t hi = std::min(index_at_or_after(index, search_end) + 1, index.n_values.size());
    if (hi < lo + 3) throw ConfigError("ramp search range holds fewer than 3 samples");

    const auto [mn, mx] = std::minmax_element(index.n_values.begin() + lo, index.n_values.begin() + hi);
    const double threshold = residual_fraction * (*mx - *mn);

    // Steepest central difference of the requested sign.
    std::size_t steepest = lo + 1;
    double best = -1.0;
    for (std::size_t k = lo + 1; k + 1 < hi; ++k) {
        const double d = index.n_values[k + 1] - index.n_values[k - 1];
        const double score = sign == 0 ? std::abs(d) : sign * d;
        if (score > best) {
            best = score;
            steepest = k;
        }
    }
    if (best <= 0.0) throw ConfigError("no index ramp of the requested sign in the search range");

    std::size_t a = steepest - 1, b = steepest + 1;  // inclusive window
    LineFit fit{index.time(steepest), index.n_values[steepest]};
    for (std::size_t k = a; k <= b; ++k) fit.add(index.time(k), index.n_values[k]);
    while (true) {
        double left = std::numeric_limits<double>::infinity();
        double right = std::numeric_limits<double>::infinity();
        if (a > lo) {
            LineFit f = fit;
            f.add(index.time(a - 1), index.n_values[a - 1]);
            left = f.rms_residual();
        }
        if (b + 1 < hi) {
            LineFit f = fit;
            f.add(index.time(b + 1), index.n_values[b + 1]);
            right = f.rms_residual();
        }
        if (std::min(left, right) >= threshold) break;
        if (left <= right) {
            --a;
            fit.add(index.time(a), index.n_values[a]);
        } else {
            ++b;
            fit.add(index.time(b), index.n_values[b]);
        }
    }
    RampSegment r;
    r.t_start = index.time(a);
    r.t_end = index.time(b);
    r.slope = fit.slope();
    r.intercept = fit.at(r.t_start);
    r.residual = fit.rms_residual();
    return r;
}

OpticalDepth optical_depth(const MediumSpec& medium, const RampSegment& ramp, double omega0, double dipole) {
    if (ramp.slope == 0.0) throw ConfigError("optical depth undefined for a flat index (zero slope)");
    if (!(omega0 > 0.0)) throw ConfigError("carrier frequency must be positive");
    OpticalDepth d;
    d.depth = units::two_pi * medium.atomic_density * dipole * dipole / omega0 * medium.baseline_index() /
              std::abs(ramp.slope);
    d.slope_sign = ramp.sign();
    return d;
}

}  // namespace medium
}  // namespace molmem
