#pragma once

#include <limits>

namespace molmem::mb {

// Two-level absorber. Infinite T1/T2 switch relaxation off.
struct AtomSpec {
    double transition_omega = 0.0;  // w_ba, a.u.
    double dipole = 0.0;            // mu_ba, a.u. (e a0), real and positive
    double t1 = std::numeric_limits<double>::infinity();
    double t2 = std::numeric_limits<double>::infinity();

    static AtomSpec from_lab(double wavelength_nm, double dipole_ea0,
                             double t1_fs = std::numeric_limits<double>::infinity(),
                             double t2_fs = std::numeric_limits<double>::infinity());

    double population_decay() const { return 1.0 / t1; }
    double coherence_decay() const { return 1.0 / t2; }
    bool relaxation_free() const { return population_decay() == 0.0 && coherence_decay() == 0.0; }

    void validate() const;
};

}  // namespace molmem::mb
