#pragma once

// Impulsive alignment of a linear rigid rotor.
//
// The rotor Hamiltonian is H(t) = B0 J^2 - U0(t) cos^2(theta). For a fixed M
// the cos^2 operator only couples J to J and J +- 2, so each (M, J-parity)
// pair forms an independent block with a symmetric tridiagonal Hamiltonian.
// Within a pulse the block is stepped with a fourth-order commutator-free
// Magnus scheme whose exponentials are evaluated exactly from the
// eigendecomposition of the tridiagonal matrix; between pulses the
// evolution is the exact phase e^{-i B0 J(J+1) dt}.

#include <complex>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "molmem/grid.hpp"

namespace molmem::rotor {

using cplx = std::complex<double>;

struct MoleculeSpec {
    std::string name = "molecule";
    double rotational_constant = 0.0;  // B0, hartree
    double alpha_perp = 0.0;           // bohr^3
    double delta_alpha = 0.0;          // alpha_par - alpha_perp, bohr^3
    double even_j_weight = 1.0;        // nuclear spin weight g_J for even J
    double odd_j_weight = 1.0;         // ... and for odd J

    double spin_weight(int j) const { return j % 2 == 0 ? even_j_weight : odd_j_weight; }
    double rotational_energy(int j) const { return rotational_constant * j * (j + 1.0); }
    // Field-free revival period pi/B0.
    double revival_period() const;

    // Throws ConfigError when an invariant is violated.
    void validate() const;
};

// One non-resonant pulse with a sin^2 envelope of half-width sigma around
// its peak; the interaction vanishes identically outside
// [center_time - sigma, center_time + sigma].
struct PulseSpec {
    double center_time = 0.0;      // a.u.
    double sigma = 0.0;            // a.u.
    double field_amplitude = 0.0;  // peak field, a.u.

    static PulseSpec from_lab(double center_fs, double sigma_fs, double intensity_w_cm2);

    double support_begin() const { return center_time - sigma; }
    double support_end() const { return center_time + sigma; }
    // U0(t) = (1/4) delta_alpha E0^2 sin^2(pi (t - t_on) / (2 sigma)) on the support.
    double interaction(double t, double delta_alpha) const;

    void validate() const;
};

// Sum of the interaction magnitudes of all pulses at time t.
double interaction_strength(std::span<const PulseSpec> pulses, double t, double delta_alpha);

// Matrix elements <J,M| cos^2 theta |J',M> for |M| <= J, J' <= j_max.
// Only the diagonal and the J' = J + 2 band are stored.
class Cos2Operator {
public:
    Cos2Operator(int j_max, int m);

    int j_max() const { return j_max_; }
    int m() const { return m_; }
    int j_min() const { return std::abs(m_); }

    // Any (J, J') pair; zero outside the band or outside the basis.
    double element(int j, int jp) const;
    double diagonal(int j) const { return diag_[j - j_min()]; }
    // <J|cos^2|J+2>, zero when J + 2 > j_max.
    double upper(int j) const;

private:
    int j_max_;
    int m_;
    std::vector<double> diag_;
    std::vector<double> upper_;
};

// Closed forms via cos^2 = 1/3 + (2/3) P2(cos theta).
double cos2_diagonal(int j, int m);
double cos2_upper(int j, int m);  // <J,M|cos^2|J+2,M>

// Throws ConfigError when j_max < |m|.
Cos2Operator build_cos2_operator(int j_max, int m);

struct RotorNumerics {
    double max_step = 20.0;             // a.u., Magnus step cap inside pulses
    int basis_margin = 20;              // initial J_max = max(J0, |M|) + margin
    int basis_increment = 10;
    int basis_cap = 400;
    double top_shell_tolerance = 1e-10;
    double thermal_tolerance = 1e-4;    // omitted Boltzmann population
    double norm_tolerance = 1e-8;
    int threads = 1;
};

// Wave packet coefficients A_J for fixed M, indexed by J - |M|.
struct RotorState {
    int j_max = 0;
    int m = 0;
    std::vector<cplx> coeffs;

    double norm() const;
};

struct SingleStateResult {
    std::vector<double> cos2;  // one value per grid sample
    RotorState final_state;    // after the last pulse
    double max_norm_drift = 0.0;
};

SingleStateResult evolve_single(int j0, int m0, std::span<const PulseSpec> pulses,
                                const TimeGrid& grid, const MoleculeSpec& molecule,
                                const RotorNumerics& numerics = {});

struct AlignmentTrace {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;
    double temperature = 0.0;  // K

    TimeGrid grid() const { return {t0, dt, values.size()}; }
};

struct ThermalLevel {
    int j = 0;
    double weight = 0.0;  // normalised Boltzmann weight of each |J,M>
};

// Initial levels kept so that the omitted population is below `tolerance`.
// Weights are renormalised over the kept levels.
std::vector<ThermalLevel> thermal_levels(const MoleculeSpec& molecule, double temperature_k,
                                         double tolerance, int j_cap);

AlignmentTrace thermal_alignment(const MoleculeSpec& molecule, std::span<const PulseSpec> pulses,
                                 double temperature_k, const TimeGrid& grid,
                                 const RotorNumerics& numerics = {});

}  // namespace molmem::rotor
