#pragma once

// Refractive index generated by the aligned molecules, and the linear-ramp
// quantities derived from it.

#include <string>
#include <vector>

#include "molmem/atom.hpp"
#include "molmem/grid.hpp"
#include "molmem/rotor.hpp"

namespace molmem::medium {

struct MediumSpec {
    rotor::MoleculeSpec molecule;
    double molecular_density = 0.0;  // N_m, bohr^-3
    double atomic_density = 0.0;     // N_a, bohr^-3
    mb::AtomSpec atom;

    // 2 pi N_m (alpha_perp + delta_alpha); the index model assumes this is small.
    double susceptibility_scale() const;
    // Index of the isotropic ensemble, <cos^2> = 1/3.
    double baseline_index() const;

    void validate() const;
    // Non-fatal remarks, e.g. a susceptibility scale above 0.1.
    std::vector<std::string> warnings() const;
};

struct IndexTrace {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> n_values;
    double n0 = 1.0;
    double pump_frame_velocity = 0.0;  // c / n0

    TimeGrid grid() const { return {t0, dt, n_values.size()}; }
    double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
};

// n(tau) = 1 + 2 pi N_m [alpha_perp + delta_alpha <cos^2>_T(tau)]
IndexTrace index_trace(const rotor::AlignmentTrace& alignment, const MediumSpec& medium);

struct RampSegment {
    double t_start = 0.0;
    double t_end = 0.0;
    double slope = 0.0;     // dn/dtau, 1/a.u. time
    double intercept = 0.0; // fitted n at t_start
    double residual = 0.0;  // RMS deviation from the fitted line

    int sign() const { return slope > 0.0 ? 1 : (slope < 0.0 ? -1 : 0); }
};

// Least-squares line over the samples inside [t_start, t_end].
RampSegment extract_ramp(const IndexTrace& index, double t_start, double t_end);

// Largest window around the steepest point of the requested sign (0: either)
// inside [search_begin, search_end] whose fit residual stays below
// `residual_fraction` of the index swing over the search range.
RampSegment find_ramp(const IndexTrace& index, double search_begin, double search_end, int sign = 0,
                      double residual_fraction = 0.02);

struct OpticalDepth {
    double depth = 0.0;
    int slope_sign = 0;  // -1 falling (absorbing) edge, +1 rising edge
};

// d = (2 pi N_a mu^2 / w0) (n0 / |dn/dtau|)
OpticalDepth optical_depth(const MediumSpec& medium, const RampSegment& ramp, double omega0, double dipole);

}  // namespace molmem::medium
