#pragma once

// Two-level Bloch dynamics along the co-moving time axis and the reduced
// forward Maxwell equation marched through the medium.
//
// In the pump frame (tau = t - z/v_s, v_s = c/n0) the field obeys
//
//   dE/dz = -(1/c) d/dtau[(n(tau) - n0) E] - (2 pi / c) dP_a/dtau,
//
// which combines the residual advection (1/c - 1/v_s) dE/dtau with the
// molecular polarisation. P_a = N_a mu rho_ba comes from a fresh Bloch
// integration along tau at every z, starting from the ground state.

#include <complex>
#include <vector>

#include "molmem/atom.hpp"
#include "molmem/field.hpp"
#include "molmem/medium.hpp"

namespace molmem::mb {

using cplx = std::complex<double>;

// rho_d is the ground-minus-excited population difference (+1 at rest).
struct AtomState {
    std::vector<cplx> rho_ba;
    std::vector<double> rho_d;

    // max over tau of |rho_ba|^2 - (1 - rho_d^2)/4; physical states keep this <= 0.
    double physicality_excess() const;
};

struct BlochOptions {
    int substeps = 1;          // RK4 steps per grid interval
    double tolerance = 1e-8;   // allowed drift of the Bloch-vector length without relaxation
};

struct BlochSolution {
    AtomState state;
    std::vector<cplx> polarization;       // P_a = N_a mu rho_ba
    std::vector<cplx> polarization_rate;  // dP_a/dtau from the equations of motion
    double length_drift = 0.0;
};

// Integrates
//   d rho_ba/dtau = -(i w_ba + 1/T2) rho_ba + i mu E rho_d
//   d rho_d/dtau  = (1 - rho_d)/T1 - 2i mu (E rho_ab - E* rho_ba),  rho_ab = conj(rho_ba)
// from rho_ba = 0, rho_d = 1 at the first sample. The fast phase exp(-i w_ba tau)
// is factored out and the field is interpolated cubically between samples.
// Throws NumericalError on a physicality violation or excessive drift.
BlochSolution integrate_bloch(const field::FieldGrid& field, const AtomSpec& atom, double atomic_density,
                              const BlochOptions& options = {});

struct PropagationConfig {
    double length = 0.0;   // L, a.u.
    int n_z_steps = 1;
    int store_every = 0;   // history stride in z steps; 0 keeps no history
    BlochOptions bloch;
    // Half-width of the band, relative to the carrier, on which the advection
    // derivative acts; components outside it only acquire the local phase.
    double derivative_band = 0.9;
    // When positive, the march is repeated with twice the z steps and the
    // relative change of exit energy must stay below this value.
    double convergence_tolerance = 0.0;

    void validate() const;
};

struct PropagationResult {
    field::FieldGrid field_out;
    std::vector<field::FieldGrid> history;
    std::vector<double> history_z;
    AtomState atom_final;                // Bloch state at the exit plane
    std::vector<double> energy_z;        // z of each diagnostics entry
    std::vector<double> energy;          // field energy after each z step (first entry: input)
    double max_physicality_excess = -1.0;
    double convergence_change = 0.0;     // set when the step-doubling check ran
};

PropagationResult propagate(const field::FieldGrid& field_in, const medium::IndexTrace& index,
                            const medium::MediumSpec& medium, const PropagationConfig& config);

// Trapezoid-rule integral of |E|^2 over tau.
double energy(const field::FieldGrid& field);
// Same integral restricted to samples with t_a <= tau <= t_b.
double energy(const field::FieldGrid& field, double t_a, double t_b);

}  // namespace molmem::mb
