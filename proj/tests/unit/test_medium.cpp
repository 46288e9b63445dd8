#include <doctest.h>

#include <cmath>
#include <numbers>

#include "molmem/errors.hpp"
#include "molmem/medium.hpp"
#include "molmem/units.hpp"

using namespace molmem;
using namespace molmem::medium;

namespace {

MediumSpec reference_medium() {
    MediumSpec m;
    m.molecule = {"CO2", units::wavenumber_to_au(0.3902), units::angstrom3_to_au(1.97), units::angstrom3_to_au(2.04),
                  1.0, 0.0};
    m.molecular_density = units::per_cm3_to_au(1e21);
    m.atomic_density = units::per_cm3_to_au(1.35e16);
    m.atom = mb::AtomSpec::from_lab(795.0, 2.99);
    return m;
}

rotor::AlignmentTrace flat(double value, std::size_t n = 50) {
    rotor::AlignmentTrace a;
    a.t0 = 0.0;
    a.dt = 10.0;
    a.values.assign(n, value);
    return a;
}

IndexTrace synthetic(double dt, std::size_t n, double (*f)(double)) {
    IndexTrace t;
    t.t0 = -0.5 * dt * static_cast<double>(n - 1);
    t.dt = dt;
    t.n0 = 1.0;
    for (std::size_t k = 0; k < n; ++k) t.n_values.push_back(f(t.time(k)));
    return t;
}

}  // namespace

TEST_CASE("isotropic alignment gives the baseline index") {
    const auto m = reference_medium();
    const auto idx = index_trace(flat(1.0 / 3.0), m);
    // 1 + 2 pi N_m (alpha_perp + delta_alpha / 3), evaluated in CGS units.
    const double nm = 1e21;
    const double a_perp = 1.97e-24, d_alpha = 2.04e-24;
    const double expected = 1.0 + 2.0 * std::numbers::pi * nm * (a_perp + d_alpha / 3.0);
    CHECK(idx.n0 == doctest::Approx(expected).epsilon(1e-12));
    CHECK(idx.n0 == doctest::Approx(1.01665).epsilon(1e-5));
    for (double n : idx.n_values) CHECK(n == doctest::Approx(idx.n0).epsilon(1e-15));
    CHECK(idx.pump_frame_velocity * idx.n0 == doctest::Approx(units::speed_of_light).epsilon(1e-15));
}

TEST_CASE("zero alignment and vacuum limits") {
    auto m = reference_medium();
    const auto idx = index_trace(flat(0.0), m);
    CHECK(idx.n_values[0] == 1.0 + units::two_pi * m.molecular_density * m.molecule.alpha_perp);
    m.molecular_density = 0.0;
    const auto vac = index_trace(flat(0.7), m);
    for (double n : vac.n_values) CHECK(n == 1.0);
    CHECK(vac.pump_frame_velocity == units::speed_of_light);
}

TEST_CASE("index trace is affine in the alignment") {
    const auto m = reference_medium();
    const auto base = index_trace(flat(0.0), m).n_values[0];
    const double a1 = 0.2, a2 = 0.5, c1 = 0.3, c2 = 0.6;
    const double lhs = index_trace(flat(c1 * a1 + c2 * a2), m).n_values[0];
    const double contrib1 = index_trace(flat(a1), m).n_values[0] - base;
    const double contrib2 = index_trace(flat(a2), m).n_values[0] - base;
    CHECK(lhs == doctest::Approx(base + c1 * contrib1 + c2 * contrib2).epsilon(1e-14));
}

TEST_CASE("ramp fit recovers a linear index exactly") {
    const auto t = synthetic(1.0, 101, [](double x) { return 1.01 + 3e-6 * x; });
    const auto r = extract_ramp(t, -40.0, 40.0);
    CHECK(r.slope == doctest::Approx(3e-6).epsilon(1e-9));
    CHECK(r.residual < 1e-14);
    CHECK(r.sign() == 1);
}

TEST_CASE("symmetric quadratic has zero fitted slope") {
    const auto t = synthetic(1.0, 101, [](double x) { return 1.01 + 1e-7 * x * x; });
    const auto r = extract_ramp(t, -30.0, 30.0);
    CHECK(std::abs(r.slope) < 1e-18);
    CHECK(r.residual > 0.0);
}

TEST_CASE("ramp extraction errors") {
    const auto t = synthetic(1.0, 101, [](double x) { return 1.0 + x; });
    CHECK_THROWS_AS(extract_ramp(t, 5.0, 5.0), ConfigError);
    CHECK_THROWS_AS(extract_ramp(t, 0.0, 1.5), ConfigError);
    CHECK_THROWS_AS(extract_ramp(t, -500.0, 0.0), ConfigError);
}

TEST_CASE("find_ramp grows around the steepest point of a sine") {
    // n = 1 + A sin(w t): steepest at t = 0, nearly linear for |w t| << 1.
    const auto t = synthetic(0.5, 2001, [](double x) { return 1.0 + 1e-3 * std::sin(0.01 * x); });
    const auto r = find_ramp(t, -300.0, 300.0, 1);
    CHECK(r.slope > 0.0);
    CHECK(r.t_start < -20.0);
    CHECK(r.t_end > 20.0);
    CHECK(0.5 * (r.t_start + r.t_end) == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    CHECK(r.slope == doctest::Approx(1e-5).epsilon(0.05));
    CHECK_THROWS_AS(find_ramp(t, -100.0, 100.0, -1), ConfigError);
}

TEST_CASE("optical depth scales with density and inverse slope") {
    const auto m = reference_medium();
    RampSegment ramp;
    ramp.slope = -2e-7;
    const double w0 = units::ev_to_au(1.4);
    const auto d = optical_depth(m, ramp, w0, m.atom.dipole);
    const double expected =
        units::two_pi * m.atomic_density * m.atom.dipole * m.atom.dipole / w0 * m.baseline_index() / 2e-7;
    CHECK(d.depth == doctest::Approx(expected).epsilon(1e-14));
    CHECK(d.slope_sign == -1);

    auto m2 = m;
    m2.atomic_density *= 2.0;
    CHECK(optical_depth(m2, ramp, w0, m.atom.dipole).depth == doctest::Approx(2.0 * d.depth).epsilon(1e-14));
    auto steeper = ramp;
    steeper.slope *= 2.0;
    CHECK(optical_depth(m, steeper, w0, m.atom.dipole).depth == doctest::Approx(0.5 * d.depth).epsilon(1e-14));

    RampSegment flat_ramp;
    CHECK_THROWS_AS(optical_depth(m, flat_ramp, w0, m.atom.dipole), ConfigError);
}

TEST_CASE("medium validation and warnings") {
    auto m = reference_medium();
    CHECK(m.warnings().empty());
    m.molecular_density = units::per_cm3_to_au(1e23);
    CHECK(m.warnings().size() == 1);
    m.atomic_density = -1.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
}
