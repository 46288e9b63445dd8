// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <future>
#include <string>
#include <vector>

#include "../support/oracles.hpp"
#include "molmem/config.hpp"
#include "molmem/maxwell_bloch.hpp"
#include "molmem/medium.hpp"
#include "molmem/protocol.hpp"
#include "molmem/rotor.hpp"
#include "molmem/units.hpp"

using namespace molmem;
using cplx = std::complex<double>;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [violated]");
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string config_path(const std::string& name) { return std::string(MOLMEM_CONFIG_DIR) + "/" + name; }

protocol::ScenarioConfig load_scenario(const std::string& name) {
    const auto cfg = config::load_file(config_path(name));
    config::require_scenario(cfg);
    return cfg.scenario;
}

rotor::MoleculeSpec co2() { return load_scenario("storage.yaml").medium.molecule; }

double l2_error(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        num += std::norm(a[k] - b[k]);
        den += std::norm(b[k]);
    }
    return std::sqrt(num / den);
}

Outcome rotor_oracle() {
    Outcome o;
    // Library elements are timed; the quadrature oracle runs afterwards.
    const auto t = Clock::now();
    std::vector<std::vector<double>> elements;
    for (int j = 0; j <= 30; ++j) {
        for (int m = -j; m <= j; ++m) {
            const auto op = rotor::build_cos2_operator(30, m);
            std::vector<double> row;
            for (int jp = std::abs(m); jp <= 30; ++jp) row.push_back(op.element(j, jp));
            elements.push_back(std::move(row));
        }
    }
    const double elapsed = seconds_since(t);
    double worst = 0.0;
    std::size_t r = 0;
    for (int j = 0; j <= 30; ++j) {
        for (int m = -j; m <= j; ++m, ++r) {
            for (int jp = std::abs(m); jp <= 30; ++jp) {
                const double v = elements[r][static_cast<std::size_t>(jp - std::abs(m))];
                worst = std::max(worst, std::abs(v - oracle::cos2_quadrature(j, jp, m)));
            }
        }
    }
    o.require(worst < 1e-10, "max |element - quadrature| = " + fmt("%.2e", worst) + " < 1e-10");
    o.require(elapsed < 1.0, "library runtime " + fmt("%.3f", elapsed) + " s < 1 s");
    return o;
}

Outcome thermal_revivals() {
    Outcome o;
    const auto t = Clock::now();
    const auto mol = co2();
    rotor::RotorNumerics num;
    num.max_step = units::fs_to_au(0.97);

    const std::vector<rotor::PulseSpec> dark{rotor::PulseSpec::from_lab(0.0, 50.0, 0.0)};
    const auto flat = rotor::thermal_alignment(mol, dark, 295.0,
                                               TimeGrid::spanning(0.0, units::ps_to_au(45.0), units::fs_to_au(50.0)), num);
    double flat_dev = 0.0;
    for (double v : flat.values) flat_dev = std::max(flat_dev, std::abs(v - 1.0 / 3.0));
    o.require(flat_dev <= 1e-3, "zero field max |<cos2> - 1/3| = " + fmt("%.1e", flat_dev) + " <= 1e-3");

    const std::vector<rotor::PulseSpec> pump{rotor::PulseSpec::from_lab(0.0, 50.0, 5e13)};
    const double period = mol.revival_period();
    const std::size_t per = 4000;
    const TimeGrid grid{units::fs_to_au(200.0), period / static_cast<double>(per), 2 * per + 1};
    const auto trace = rotor::thermal_alignment(mol, pump, 295.0, grid, num);
    double worst = 0.0;
    for (std::size_t k = 0; k <= per; ++k) {
        worst = std::max(worst, std::abs(trace.values[k + per] - trace.values[k]) / trace.values[k]);
    }
    o.require(worst < 1e-6, "max relative |trace(t + pi/B0) - trace(t)| = " + fmt("%.1e", worst) + " < 1e-6");

    // Half revival: alignment maximum followed by an anti-alignment minimum.
    // Its centre is where the trace falls through 1/3 most steeply.
    std::size_t k_max = 0, k_min = 0;
    for (std::size_t k = 0; k < trace.values.size(); ++k) {
        const double tf = units::au_to_fs(grid.time(k));
        if (tf < 19000.0 || tf > 24000.0) continue;
        if (k_max == 0 || trace.values[k] > trace.values[k_max]) k_max = k;
        if (k_min == 0 || trace.values[k] < trace.values[k_min]) k_min = k;
    }
    double t_cross = 0.0, t_steep = 0.0, steepest = 0.0;
    for (std::size_t k = k_max; k < k_min; ++k) {
        const double a = trace.values[k] - 1.0 / 3.0, b = trace.values[k + 1] - 1.0 / 3.0;
        if (a > 0.0 && b <= 0.0) t_cross = units::au_to_fs(grid.time(k) + a / (a - b) * grid.dt);
        if (a - b > steepest) {
            steepest = a - b;
            t_steep = units::au_to_fs(grid.time(k) + 0.5 * grid.dt);
        }
    }
    const bool shaped = k_max < k_min && trace.values[k_max] > 0.36 && trace.values[k_min] < 0.30;
    o.require(shaped, "revival swing " + fmt("%.3f", trace.values[k_max]) + " at " +
                          fmt("%.0f", units::au_to_fs(grid.time(k_max))) + " fs to " +
                          fmt("%.3f", trace.values[k_min]) + " at " + fmt("%.0f", units::au_to_fs(grid.time(k_min))) +
                          " fs");
    o.require(t_cross >= 21300.0 && t_cross <= 21450.0,
              "isotropic crossing at " + fmt("%.1f", t_cross) + " fs in [21300, 21450]");
    o.require(t_steep >= 21300.0 && t_steep <= 21450.0,
              "steepest fall at " + fmt("%.1f", t_steep) + " fs in [21300, 21450]");
    const double elapsed = seconds_since(t);
    o.require(elapsed < 120.0, "runtime " + fmt("%.1f", elapsed) + " s < 120 s");
    return o;
}

Outcome phase_modulation() {
    Outcome o;
    auto medium = load_scenario("storage.yaml").medium;
    medium.atomic_density = 0.0;
    const double w0 = units::ev_to_au(1.4);
    const double fwhm = units::fs_to_au(50.0);
    const auto grid = TimeGrid::spanning(units::fs_to_au(-400.0), units::fs_to_au(400.0), field::max_carrier_step(w0));
    const auto input = field::make_signal({1e-7, fwhm, 0.0, w0}, grid);

    // Linear ramp of 1e-6 per fs around the pulse centre on top of the isotropic index.
    const double ndot = 1e-6 / units::fs_to_au(1.0);
    medium::IndexTrace index;
    index.t0 = grid.t0;
    index.dt = grid.dt;
    index.n0 = medium.baseline_index();
    index.pump_frame_velocity = units::speed_of_light / index.n0;
    for (std::size_t k = 0; k < grid.size; ++k) index.n_values.push_back(index.n0 + ndot * grid.time(k));

    mb::PropagationConfig cfg;
    cfg.length = units::cm_to_au(0.1);
    cfg.n_z_steps = 10;
    const auto r = mb::propagate(input, index, medium, cfg);

    auto expected = input;
    for (std::size_t k = 0; k < grid.size; ++k) {
        expected.samples[k] *=
            std::polar(1.0, w0 * (index.n_values[k] - index.n0) * cfg.length / units::speed_of_light);
    }
    const double err = l2_error(r.field_out.samples, expected.samples);
    o.require(err < 0.01, "L2 error vs phase oracle " + fmt("%.2e", err) + " < 1e-2");

    const double shift = field::spectrum(r.field_out).centroid() - field::spectrum(input).centroid();
    const double predicted = -w0 * cfg.length / units::speed_of_light * ndot;
    const double rel = std::abs(shift / predicted - 1.0);
    o.require(rel < 0.03, "centroid shift " + fmt("%.4e", units::au_to_ev(shift)) + " eV vs " +
                              fmt("%.4e", units::au_to_ev(predicted)) + " eV, rel " + fmt("%.2e", rel) + " < 0.03");
    return o;
}

Outcome bloch_linear_response() {
    Outcome o;
    const auto atom = mb::AtomSpec::from_lab(795.0, 2.99, 100.0, 50.0);
    const double t2 = atom.t2;
    const double e0 = 1e-6 * atom.transition_omega / atom.dipole;
    const auto grid = TimeGrid::spanning(0.0, 40.0 * t2, field::max_carrier_step(1.2 * atom.transition_omega));
    double worst = 0.0;
    for (double k : {0.0, 1.0, -1.0, 3.0, -3.0}) {
        const double w = atom.transition_omega + k / t2;
        field::FieldGrid f{grid.t0, grid.dt, std::vector<cplx>(grid.size), w};
        for (std::size_t i = 0; i < grid.size; ++i) f.samples[i] = std::polar(e0, -w * grid.time(i));
        const auto s = mb::integrate_bloch(f, atom, 1.0);
        const double expected = oracle::steady_coherence(atom.dipole, e0, k / t2, t2);
        worst = std::max(worst, std::abs(std::abs(s.state.rho_ba.back()) / expected - 1.0));
    }
    o.require(worst < 0.01, "max relative steady-state error over 5 detunings " + fmt("%.2e", worst) + " < 0.01");
    return o;
}

struct StorageRun {
    protocol::ScenarioConfig config;
    protocol::PreparedMedium prepared;
    protocol::MemoryResult result;
};

StorageRun storage_run() {
    StorageRun s;
    s.config = load_scenario("storage.yaml");
    s.prepared = protocol::prepare(s.config);
    s.result = protocol::run_memory(s.config, s.prepared);
    return s;
}

Outcome storage(const StorageRun& s) {
    Outcome o;
    const auto& r = s.result;
    o.require(r.emitted, "emission detected");
    o.require(r.transmitted_fraction < 0.1,
              "in-window transmission " + fmt("%.3f", r.transmitted_fraction) + " of input < 0.1");
    const double tau = units::au_to_fs(r.storage_time);
    o.require(std::abs(tau - 300.0) <= 60.0, "storage " + fmt("%.1f", tau) + " fs in 300 +- 20%");
    const double expected = r.storage_time > 0.0 ? units::two_pi / r.storage_time : 0.0;
    const double rel = expected > 0.0 ? std::abs(r.fringe_spacing / expected - 1.0) : 1.0;
    o.require(rel <= 0.1, "fringe spacing " + fmt("%.5f", units::au_to_ev(r.fringe_spacing)) + " eV vs 2 pi/tau " +
                              fmt("%.5f", units::au_to_ev(expected)) + " eV, rel " + fmt("%.3f", rel) + " <= 0.1");
    o.require(true, "efficiency " + fmt("%.3f", r.efficiency) + ", depth " + fmt("%.2f", r.optical_depth));
    return o;
}

Outcome depth_and_read_time() {
    Outcome o;
    const auto sweep_cfg = config::load_file(config_path("sweep.yaml"));
    const auto& depths = sweep_cfg.sweep_depths;
    const auto pts = protocol::sweep_optical_depth(sweep_cfg.scenario, depths, 4);
    bool monotone = true;
    std::string curve;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i > 0 && !(pts[i].efficiency > pts[i - 1].efficiency)) monotone = false;
        curve += (i ? " " : "") + fmt("%g", pts[i].optical_depth) + ":" + fmt("%.3f", pts[i].efficiency);
    }
    o.require(monotone, "(a) efficiency rises with every doubling of depth [" + curve + "]");
    const double top = pts.back().efficiency, next = pts[pts.size() - 2].efficiency;
    o.require(top > 0.8 && next > 0.8 && top - next < 0.02,
              "(a) saturates above 0.8 (last two " + fmt("%.3f", next) + ", " + fmt("%.3f", top) + ")");

    const auto read = load_scenario("read_times.yaml");
    const std::vector<double> regen_fs{22500.0, 23000.0, 23500.0};
    std::vector<std::future<protocol::MemoryResult>> jobs;
    for (double tr : regen_fs) {
        auto cfg = read;
        cfg.pulses.back() = rotor::PulseSpec::from_lab(tr, 50.0, 5e13);
        cfg.window.tau_end = units::fs_to_au(tr + 700.0);
        jobs.push_back(std::async(std::launch::async, [cfg] { return protocol::run_memory(cfg); }));
    }
    std::vector<double> peaks;
    std::string listing;
    bool all_emitted = true, after_control = true;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto r = jobs[i].get();
        all_emitted = all_emitted && r.emitted;
        const double peak = units::au_to_fs(read.signal.center_time + r.storage_time);
        peaks.push_back(peak);
        after_control = after_control && peak > regen_fs[i] && peak < regen_fs[i] + 500.0;
        listing += (i ? ", " : "") + fmt("%.0f", regen_fs[i]) + "->" + fmt("%.0f", peak) + " fs (eff " +
                   fmt("%.2f", r.efficiency) + ")";
    }
    o.require(all_emitted && after_control && std::is_sorted(peaks.begin(), peaks.end()) &&
                  std::adjacent_find(peaks.begin(), peaks.end()) == peaks.end(),
              "(b) ordered read-out peaks " + listing);
    return o;
}

Outcome time_bandwidth() {
    Outcome o;
    // Synthetic 20 ps echo of a 50 fs pulse analysed through the memory result path.
    const double w0 = units::ev_to_au(1.4);
    const double fwhm = units::fs_to_au(50.0);
    const double delay = units::ps_to_au(20.0);
    // The echo centre falls exactly on a sample.
    const auto steps = static_cast<std::size_t>(std::ceil(delay / field::max_carrier_step(w0)));
    const double dt = delay / static_cast<double>(steps);
    const std::size_t pad = steps / 20;
    const TimeGrid grid{-static_cast<double>(pad) * dt, dt, steps + 2 * pad + 1};
    const auto input = field::make_signal({1.0, fwhm, 0.0, w0}, grid);
    auto output = field::make_signal({0.9, fwhm, delay, w0}, grid);
    protocol::WindowPolicy window;
    const auto r = protocol::analyze(input, output, {1.0, fwhm, 0.0, w0}, window);
    o.require(r.emitted, "echo detected");
    o.require(std::abs(r.time_bandwidth_product - 400.0) < 1e-9,
              "MemoryResult product " + fmt("%.12f", r.time_bandwidth_product) + " = 400 within 1e-9");
    const double exact = protocol::time_bandwidth(delay, fwhm);
    o.require(exact == 400.0, "20 ps / 50 fs = " + fmt("%.17g", exact));
    return o;
}

Outcome numerical_contracts(const StorageRun& s) {
    Outcome o;
    const auto& base = s.result;

    auto doubled = s.config;
    doubled.signal.amplitude *= 2.0;
    const auto r2 = protocol::run_memory(doubled, s.prepared);
    std::vector<cplx> expect(base.propagation.field_out.samples);
    for (auto& v : expect) v *= 2.0;
    const double lin = l2_error(r2.propagation.field_out.samples, expect);
    o.require(lin < 1e-3, "E0 x2 output deviation " + fmt("%.2e", lin) + " < 1e-3");

    auto fine = s.config;
    fine.propagation.n_z_steps *= 2;
    fine.propagation.store_every = 0;
    fine.window.dtau = 0.5 * protocol::resolved_dtau(s.config);
    const auto rf = protocol::run_memory(fine);
    const double e1 = mb::energy(base.propagation.field_out), e2 = mb::energy(rf.propagation.field_out);
    const double change = std::abs(e2 - e1) / e2;
    o.require(change < 5e-3, "exit energy change on step halving " + fmt("%.2e", change) + " < 5e-3");

    double excess = std::max({base.propagation.max_physicality_excess, r2.propagation.max_physicality_excess,
                              rf.propagation.max_physicality_excess,
                              base.propagation.atom_final.physicality_excess()});
    o.require(excess <= 1e-12, "max |rho_ba|^2 - (1 - rho_d^2)/4 = " + fmt("%.2e", excess) + " <= 1e-12");

    auto vac = s.config.medium;
    vac.molecular_density = 0.0;
    vac.atomic_density = 0.0;
    const auto index = medium::index_trace(s.prepared.alignment, vac);
    const auto input = field::make_signal(s.config.signal, s.prepared.grid);
    const auto rv = mb::propagate(input, index, vac, s.config.propagation);
    const double vac_err = l2_error(rv.field_out.samples, input.samples);
    o.require(vac_err < 1e-8, "vacuum identity error " + fmt("%.2e", vac_err) + " < 1e-8");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    // Optional arguments select criteria by number.
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    StorageRun shared;
    bool have_storage = false;
    auto storage_once = [&]() -> const StorageRun& {
        if (!have_storage) {
            shared = storage_run();
            have_storage = true;
        }
        return shared;
    };
    const std::vector<Criterion> criteria{
        {1, "rotor oracle equivalence", rotor_oracle},
        {2, "thermal baseline and revivals", thermal_revivals},
        {3, "phase-modulation oracle", phase_modulation},
        {4, "Bloch linear response", bloch_linear_response},
        {5, "storage and retrieval", [&] { return storage(storage_once()); }},
        {6, "depth and read-time", depth_and_read_time},
        {7, "time-bandwidth arithmetic", time_bandwidth},
        {8, "numerical contracts", [&] { return numerical_contracts(storage_once()); }},
    };

    int failures = 0, ran = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        ++ran;
        const auto t = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failures;
        std::printf("%s %d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds_since(t),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", ran - failures, ran);
    return failures == 0 ? 0 : 1;
}
