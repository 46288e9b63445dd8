// Command-line front end: align, memory, sweep, spectrum.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "molmem/config.hpp"
#include "molmem/errors.hpp"
#include "molmem/field.hpp"
#include "molmem/io.hpp"
#include "molmem/medium.hpp"
#include "molmem/protocol.hpp"
#include "molmem/rotor.hpp"
#include "molmem/units.hpp"

namespace fs = std::filesystem;
using namespace molmem;

namespace {

enum ExitCode { ok = 0, config_error = 2, numerical_error = 3, no_emission = 4 };

struct Common {
    std::string config;
    std::string out = ".";
    int threads = 1;
    double grid_scale = 1.0;
};

std::string path_in(const Common& c, const std::string& name) { return (fs::path(c.out) / name).string(); }

config::RunConfig load(const Common& c) {
    auto cfg = config::load_file(c.config, {c.grid_scale, c.threads});
    for (const auto& w : cfg.scenario.medium.warnings()) std::cerr << "warning: " << w << "\n";
    fs::create_directories(c.out);
    return cfg;
}

int cmd_align(const Common& c) {
    const auto cfg = load(c);
    if (!cfg.align) throw ConfigError(c.config + ": the align command needs an 'align' section");
    const auto& sc = cfg.scenario;
    const auto grid = TimeGrid::spanning(cfg.align->t_begin, cfg.align->t_end, cfg.align->dt);
    const auto trace = rotor::thermal_alignment(sc.medium.molecule, sc.pulses, sc.temperature, grid, sc.rotor);
    const auto index = medium::index_trace(trace, sc.medium);
    io::write_atomic(path_in(c, "alignment.csv"), io::alignment_csv(trace));
    io::write_atomic(path_in(c, "index.csv"), io::index_csv(index));

    io::json summary;
    summary["n0"] = index.n0;
    summary["pump_frame_velocity_au"] = index.pump_frame_velocity;
    summary["revival_period_fs"] = units::au_to_fs(sc.medium.molecule.revival_period());
    if (cfg.ramp) {
        const auto ramp = medium::find_ramp(index, cfg.ramp->begin, cfg.ramp->end);
        io::write_atomic(path_in(c, "ramp.json"), io::dump(io::ramp_json(ramp)));
        summary["ramp"] = io::ramp_json(ramp);
    }
    summary["config_echo"] = cfg.echo;
    io::write_atomic(path_in(c, "align.json"), io::dump(summary));
    return ok;
}

void write_memory_outputs(const Common& c, const config::RunConfig& cfg, const protocol::PreparedMedium& prepared,
                          const protocol::MemoryResult& r) {
    io::write_atomic(path_in(c, "alignment.csv"), io::alignment_csv(prepared.alignment));
    io::write_atomic(path_in(c, "index.csv"), io::index_csv(prepared.index));
    io::write_atomic(path_in(c, "field_in.csv"), io::field_csv(r.input));
    io::write_atomic(path_in(c, "field_out.csv"), io::field_csv(r.propagation.field_out));
    const auto& hist = r.propagation.history;
    for (std::size_t h = 0; h < hist.size(); ++h) {
        io::write_atomic(path_in(c, "field_z" + std::to_string(h) + ".csv"), io::field_csv(hist[h]));
    }
    io::json diag = io::diagnostics_json(r.propagation);
    io::json snaps = io::json::array();
    for (std::size_t h = 0; h < hist.size(); ++h) {
        snaps.push_back({{"file", "field_z" + std::to_string(h) + ".csv"},
                         {"z_cm", units::au_to_cm(r.propagation.history_z[h])}});
    }
    diag["snapshots"] = snaps;
    io::write_atomic(path_in(c, "diagnostics.json"), io::dump(diag));
    io::write_atomic(path_in(c, "spectrum_in.csv"),
                     io::spectrum_csv(field::spectrum(r.input), cfg.spectrum_omega_min, cfg.spectrum_omega_max));
    io::write_atomic(path_in(c, "spectrum_out.csv"), io::spectrum_csv(field::spectrum(r.propagation.field_out),
                                                                      cfg.spectrum_omega_min, cfg.spectrum_omega_max));
    io::json result = io::memory_result_json(r, cfg.echo);
    result["ramp"] = io::ramp_json(prepared.write_ramp);
    io::write_atomic(path_in(c, "memory.json"), io::dump(result));
}

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

int cmd_memory(const Common& c) {
    const auto cfg = load(c);
    config::require_scenario(cfg);
    const auto prepared = protocol::prepare(cfg.scenario);
    const auto r = protocol::run_memory(cfg.scenario, prepared);
    write_memory_outputs(c, cfg, prepared, r);
    if (!r.emitted) {
        std::cerr << "no emission detected above the floor; memory.json reports efficiency 0\n";
        return no_emission;
    }
    return ok;
}

int cmd_spectrum(const Common& c) {
    const auto cfg = load(c);
    config::require_scenario(cfg);
    auto sc = cfg.scenario;
    if (sc.propagation.store_every == 0) sc.propagation.store_every = std::max(1, sc.propagation.n_z_steps / 20);
    const auto prepared = protocol::prepare(sc);
    const auto r = protocol::run_memory(sc, prepared);
    const double lo = cfg.spectrum_omega_min;
    const double hi = finite_or(cfg.spectrum_omega_max, 2.0 * sc.signal.carrier_omega);
    const auto& hist = r.propagation.history;
    const auto zmap = field::spectrogram(hist, r.propagation.history_z, sc.signal.fwhm, lo, hi);
    io::write_atomic(path_in(c, "spectrogram_z.csv"), io::spectrogram_csv(zmap, "z_cm"));
    const auto tmap = field::short_time_spectrogram(r.propagation.field_out, sc.signal.fwhm, lo, hi);
    io::write_atomic(path_in(c, "spectrogram_tau.csv"), io::spectrogram_csv(tmap, "tau_fs"));
    io::write_atomic(path_in(c, "spectrum_in.csv"), io::spectrum_csv(field::spectrum(r.input), lo, hi));
    io::write_atomic(path_in(c, "spectrum_out.csv"), io::spectrum_csv(field::spectrum(r.propagation.field_out), lo, hi));
    io::json j;
    j["fringe_spacing_ev"] = units::au_to_ev(r.fringe_spacing);
    j["fringe_plane_cm"] = units::au_to_cm(r.fringe_plane_z);
    j["storage_time_fs"] = units::au_to_fs(r.storage_time);
    j["inverse_storage_ev"] = r.storage_time > 0.0 ? units::au_to_ev(units::two_pi / r.storage_time) : 0.0;
    j["config_echo"] = cfg.echo;
    io::write_atomic(path_in(c, "spectrum.json"), io::dump(j));
    return r.emitted ? ok : no_emission;
}

int cmd_sweep(const Common& c) {
    const auto cfg = load(c);
    config::require_scenario(cfg);
    if (cfg.sweep_depths.empty()) throw ConfigError(c.config + ": the sweep command needs 'sweep.optical_depths'");
    const auto points = protocol::sweep_optical_depth(cfg.scenario, cfg.sweep_depths, c.threads);
    io::write_atomic(path_in(c, "sweep.csv"), io::sweep_csv(points));
    io::json meta;
    io::json rows = io::json::array();
    for (const auto& p : points) {
        rows.push_back({{"optical_depth", p.optical_depth},
                        {"atomic_density_cm3", units::au_to_per_cm3(p.atomic_density)},
                        {"efficiency", p.efficiency},
                        {"emitted", p.emitted}});
    }
    meta["depth_mapping"] = "optical depth realised by scaling the atomic density at the fixed write ramp";
    meta["points"] = rows;
    meta["config_echo"] = cfg.echo;
    io::write_atomic(path_in(c, "sweep.json"), io::dump(meta));
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gradient-echo optical memory driven by molecular alignment"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "YAML run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", common.out, "output directory");
        sub->add_option("--threads", common.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--grid-scale", common.grid_scale, "uniform grid coarsening factor")
            ->check(CLI::PositiveNumber);
    };
    auto* align = app.add_subcommand("align", "alignment and refractive-index traces");
    auto* memory = app.add_subcommand("memory", "storage and retrieval run");
    auto* sweep = app.add_subcommand("sweep", "efficiency versus optical depth");
    auto* spectrum = app.add_subcommand("spectrum", "spectra and spectrograms of a memory run");
    for (auto* s : {align, memory, sweep, spectrum}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (align->parsed()) return cmd_align(common);
        if (memory->parsed()) return cmd_memory(common);
        if (sweep->parsed()) return cmd_sweep(common);
        return cmd_spectrum(common);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return numerical_error;
    } catch (const NoEmissionError& e) {
        std::cerr << "no emission: " << e.what() << "\n";
        return no_emission;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
