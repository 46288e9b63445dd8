#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "../support/oracles.hpp"
#include "molmem/errors.hpp"
#include "molmem/rotor.hpp"
#include "molmem/units.hpp"

using namespace molmem;
using namespace molmem::rotor;

namespace {

MoleculeSpec co2() {
    return {"CO2", units::wavenumber_to_au(0.3902), units::angstrom3_to_au(1.97), units::angstrom3_to_au(2.04), 1.0,
            0.0};
}

}  // namespace

TEST_CASE("cos2 elements agree with angular quadrature") {
    double worst = 0.0;
    for (int j = 0; j <= 30; ++j) {
        for (int m = -j; m <= j; ++m) {
            worst = std::max(worst, std::abs(cos2_diagonal(j, m) - oracle::cos2_quadrature(j, j, m)));
            if (j + 2 <= 32) worst = std::max(worst, std::abs(cos2_upper(j, m) - oracle::cos2_quadrature(j, j + 2, m)));
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("cos2 operator is banded and symmetric") {
    const auto op = build_cos2_operator(20, 3);
    CHECK(op.element(5, 6) == 0.0);
    CHECK(op.element(5, 9) == 0.0);
    CHECK(op.element(7, 9) == doctest::Approx(op.element(9, 7)));
    CHECK(op.element(7, 9) == doctest::Approx(oracle::cos2_quadrature(7, 9, 3)).epsilon(1e-12));
    CHECK(op.upper(19) == 0.0);
    // cos^2 of J = 0 is 1/3 (isotropic).
    CHECK(cos2_diagonal(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(build_cos2_operator(2, 3), ConfigError);
}

TEST_CASE("field-free rotor keeps its initial expectation") {
    const auto grid = TimeGrid::spanning(0.0, units::fs_to_au(2000.0), units::fs_to_au(10.0));
    const auto r = evolve_single(4, 2, {}, grid, co2());
    for (double v : r.cos2) CHECK(v == doctest::Approx(cos2_diagonal(4, 2)).epsilon(1e-13));
}

TEST_CASE("+M and -M give identical dynamics") {
    const std::vector<PulseSpec> pulses{PulseSpec::from_lab(0.0, 50.0, 5e13)};
    const auto grid = TimeGrid::spanning(units::fs_to_au(-100.0), units::fs_to_au(3000.0), units::fs_to_au(20.0));
    const auto a = evolve_single(6, 3, pulses, grid, co2());
    const auto b = evolve_single(6, -3, pulses, grid, co2());
    for (std::size_t k = 0; k < a.cos2.size(); ++k) CHECK(a.cos2[k] == doctest::Approx(b.cos2[k]).epsilon(1e-13));
}

TEST_CASE("single-state evolution is unitary and bounded") {
    const std::vector<PulseSpec> pulses{PulseSpec::from_lab(0.0, 50.0, 5e13)};
    const auto grid = TimeGrid::spanning(units::fs_to_au(-100.0), units::fs_to_au(5000.0), units::fs_to_au(5.0));
    const auto r = evolve_single(10, 0, pulses, grid, co2());
    CHECK(r.max_norm_drift < 1e-10);
    CHECK(std::abs(r.final_state.norm() - 1.0) < 1e-10);
    for (double v : r.cos2) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("halving the Magnus step changes the trace by less than 1e-8") {
    const std::vector<PulseSpec> pulses{PulseSpec::from_lab(0.0, 50.0, 5e13)};
    const auto grid = TimeGrid::spanning(units::fs_to_au(-60.0), units::fs_to_au(400.0), units::fs_to_au(2.0));
    RotorNumerics coarse;
    coarse.max_step = 20.0;
    RotorNumerics fine = coarse;
    fine.max_step = 10.0;
    const auto a = evolve_single(8, 1, pulses, grid, co2(), coarse);
    const auto b = evolve_single(8, 1, pulses, grid, co2(), fine);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.cos2.size(); ++k) worst = std::max(worst, std::abs(a.cos2[k] - b.cos2[k]));
    CHECK(worst < 1e-8);
}

TEST_CASE("thermal levels are normalised and truncated at the tolerance") {
    const auto levels = thermal_levels(co2(), 295.0, 1e-4, 400);
    double sum = 0.0;
    for (const auto& l : levels) {
        CHECK(l.j % 2 == 0);
        sum += l.weight * (2 * l.j + 1);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(levels.back().j > 40);
    CHECK_THROWS_AS(thermal_levels(co2(), 0.0, 1e-4, 400), ConfigError);
}

TEST_CASE("isotropic thermal ensemble stays at 1/3 without a field") {
    const auto grid = TimeGrid::spanning(0.0, units::fs_to_au(1000.0), units::fs_to_au(50.0));
    const std::vector<PulseSpec> zero{PulseSpec::from_lab(200.0, 50.0, 0.0)};
    const auto trace = thermal_alignment(co2(), zero, 295.0, grid);
    for (double v : trace.values) CHECK(std::abs(v - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("pump interaction is confined to its support") {
    const auto p = PulseSpec::from_lab(0.0, 50.0, 5e13);
    const double da = co2().delta_alpha;
    CHECK(p.interaction(p.support_begin() - 1.0, da) == 0.0);
    CHECK(p.interaction(p.support_end() + 1.0, da) == 0.0);
    CHECK(p.interaction(0.0, da) == doctest::Approx(0.25 * da * p.field_amplitude * p.field_amplitude));
    CHECK(p.field_amplitude == doctest::Approx(std::sqrt(5e13 / units::intensity_au_w_cm2)));
}

TEST_CASE("invalid molecules and pulses are rejected") {
    auto m = co2();
    m.rotational_constant = 0.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = co2();
    m.even_j_weight = m.odd_j_weight = 0.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    PulseSpec p;
    p.sigma = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("thermal trace after the pump repeats with the revival period") {
    const auto mol = co2();
    const double period = mol.revival_period();
    const std::vector<PulseSpec> pulses{PulseSpec::from_lab(0.0, 50.0, 5e13)};
    const std::size_t per = 400;
    const double dt = period / static_cast<double>(per);
    const TimeGrid grid{units::fs_to_au(200.0), dt, 2 * per + 1};
    RotorNumerics num;
    num.max_step = 40.0;
    const auto trace = thermal_alignment(mol, pulses, 295.0, grid, num);
    double worst = 0.0;
    for (std::size_t k = 0; k <= per; ++k) {
        worst = std::max(worst, std::abs(trace.values[k + per] - trace.values[k]) / trace.values[k]);
    }
    CHECK(worst < 1e-6);
}
