#pragma once

// End-to-end memory scenarios: alignment -> index -> propagation -> analysis.

#include <span>
#include <string>
#include <vector>

#include "molmem/field.hpp"
#include "molmem/maxwell_bloch.hpp"
#include "molmem/medium.hpp"
#include "molmem/rotor.hpp"

namespace molmem::protocol {

// Where and how finely tau is sampled, and how the output is read.
struct WindowPolicy {
    double tau_begin = 0.0;  // analysis span, a.u.
    double tau_end = 0.0;
    double dtau = 0.0;       // 0: one twentieth of the fastest optical period
    // Zero-field padding added around the analysis span, as a fraction of
    // its length (split evenly between both sides).
    double guard_fraction = 0.2;
    double exclusion_halfwidth = 0.0;   // around the input peak; 0: 3 sigma_s
    double ramp_search_halfwidth = 0.0; // around the input peak; 0: 4 sigma_s
    double emission_floor = 1e-4;       // relative to the input peak intensity
    double edge_fraction = 0.01;        // window edges, relative to the emission peak
};

struct ScenarioConfig {
    medium::MediumSpec medium;
    double temperature = 0.0;  // K
    std::vector<rotor::PulseSpec> pulses;
    field::SignalSpec signal;
    mb::PropagationConfig propagation;
    WindowPolicy window;
    rotor::RotorNumerics rotor;

    void validate() const;
};

// Everything that does not depend on the atomic density.
struct PreparedMedium {
    TimeGrid grid;  // padded computational grid
    rotor::AlignmentTrace alignment;
    medium::IndexTrace index;
    medium::RampSegment write_ramp;
    double depth_per_density = 0.0;  // optical depth per unit N_a (bohr^3)
};

// Resolved sampling step (explicit or derived from the carrier and transition).
double resolved_dtau(const ScenarioConfig& config);
TimeGrid computational_grid(const ScenarioConfig& config);

PreparedMedium prepare(const ScenarioConfig& config);

struct EmissionWindow {
    double t_a = 0.0;
    double t_b = 0.0;
    double t_peak = 0.0;
    double peak_intensity = 0.0;
};

// Dominant intensity peak after `exclusion_end` (and before `search_end`),
// bracketed by the nearest samples whose intensity drops below
// edge_fraction of the peak. Throws NoEmissionError when the peak is below
// `floor_intensity`.
EmissionWindow detect_emission_window(const field::FieldGrid& output, double exclusion_end, double search_end,
                                      double floor_intensity, double edge_fraction = 0.01);

// Integral of |E_out|^2 over [t_a, t_b] divided by the full input energy.
double efficiency(const field::FieldGrid& input, const field::FieldGrid& output, double t_a, double t_b);

// storage / sigma_s
double time_bandwidth(double storage_time, double signal_fwhm);

struct MemoryResult {
    bool emitted = false;
    double efficiency = 0.0;
    double storage_time = 0.0;   // emitted peak minus input peak, a.u.
    double t_a = 0.0;
    double t_b = 0.0;
    double leakage_fraction = 0.0;      // energy outside the exclusion and emission windows
    double transmitted_fraction = 0.0;  // energy left inside the exclusion window
    double time_bandwidth_product = 0.0;
    double optical_depth = 0.0;
    int write_slope_sign = 0;
    // Spectral fringe spacing of the field at the plane where the light still
    // at the input time and the light already re-emitted carry the most
    // balanced energies; 0 when fewer than three fringes are found. Falls
    // back to the exit field when no history was stored.
    double fringe_spacing = 0.0;
    double fringe_plane_z = 0.0;
    field::FieldGrid input;
    mb::PropagationResult propagation;  // holds the output field and diagnostics
};

// Fills the analysis fields of a result from an input/output pair.
MemoryResult analyze(const field::FieldGrid& input, const field::FieldGrid& output,
                     const field::SignalSpec& signal, const WindowPolicy& window);

MemoryResult run_memory(const ScenarioConfig& config);
MemoryResult run_memory(const ScenarioConfig& config, const PreparedMedium& prepared);

struct SweepPoint {
    double optical_depth = 0.0;
    double atomic_density = 0.0;  // bohr^-3
    double efficiency = 0.0;
    bool emitted = false;
};

// One run per depth, realised by scaling N_a at the prepared ramp.
std::vector<SweepPoint> sweep_optical_depth(const ScenarioConfig& base, std::span<const double> depths,
                                            int threads = 1);

}  // namespace molmem::protocol
