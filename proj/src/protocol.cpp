#include "molmem/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "molmem/errors.hpp"
#include "molmem/units.hpp"

namespace molmem::protocol {

namespace {

double exclusion_halfwidth(const WindowPolicy& w, const field::SignalSpec& s) {
    return w.exclusion_halfwidth > 0.0 ? w.exclusion_halfwidth : 3.0 * s.fwhm;
}

double ramp_halfwidth(const WindowPolicy& w, const field::SignalSpec& s) {
    return w.ramp_search_halfwidth > 0.0 ? w.ramp_search_halfwidth : 4.0 * s.fwhm;
}

}  // namespace

void ScenarioConfig::validate() const {
    medium.validate();
    signal.validate();
    propagation.validate();
    if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
    for (const auto& p : pulses) p.validate();
    const auto& w = window;
    if (!(w.tau_end > w.tau_begin)) throw ConfigError("tau window must have tau_end > tau_begin");
    if (w.dtau < 0.0) throw ConfigError("tau step must be non-negative");
    if (w.guard_fraction < 0.2) throw ConfigError("guard fraction must be at least 0.2");
    if (w.exclusion_halfwidth < 0.0 || w.ramp_search_halfwidth < 0.0)
        throw ConfigError("window half-widths must be non-negative");
    if (!(w.emission_floor > 0.0) || !(w.edge_fraction > 0.0) || w.edge_fraction >= 1.0)
        throw ConfigError("emission floor and edge fraction must lie in (0, 1)");
    const double reach = 3.0 * signal.fwhm;
    if (signal.center_time - reach < w.tau_begin || signal.center_time + reach > w.tau_end) {
        throw ConfigError("signal centre +- 3 durations must lie inside the tau window");
    }
    if (!(signal.amplitude >= 0.0)) throw ConfigError("signal amplitude must be non-negative");
}

double resolved_dtau(const ScenarioConfig& config) {
    if (config.window.dtau > 0.0) return config.window.dtau;
    const double fastest = std::max(config.signal.carrier_omega, config.medium.atom.transition_omega);
    return field::max_carrier_step(fastest);
}

TimeGrid computational_grid(const ScenarioConfig& config) {
    const auto& w = config.window;
    const double pad = 0.5 * w.guard_fraction * (w.tau_end - w.tau_begin);
    return TimeGrid::spanning(w.tau_begin - pad, w.tau_end + pad, resolved_dtau(config));
}

PreparedMedium prepare(const ScenarioConfig& config) {
    config.validate();
    PreparedMedium out;
    out.grid = computational_grid(config);
    out.alignment =
        rotor::thermal_alignment(config.medium.molecule, config.pulses, config.temperature, out.grid, config.rotor);
    out.index = medium::index_trace(out.alignment, config.medium);

    // Ramp under the signal, with the sign of the local slope at its centre.
    const double t0 = config.signal.center_time;
    const double h = ramp_halfwidth(config.window, config.signal);
    const auto& n = out.index.n_values;
    const auto k = static_cast<std::size_t>(
        std::clamp((t0 - out.index.t0) / out.index.dt, 1.0, static_cast<double>(n.size() - 2)));
    const double local = n[k + 1] - n[k - 1];
    const int sign = local > 0.0 ? 1 : (local < 0.0 ? -1 : 0);
    if (sign != 0) {
        try {
            out.write_ramp = medium::find_ramp(out.index, std::max(t0 - h, out.index.t0),
                                               std::min(t0 + h, out.grid.t_end()), sign);
            auto unit = config.medium;
            unit.atomic_density = 1.0;
            out.depth_per_density =
                medium::optical_depth(unit, out.write_ramp, config.signal.carrier_omega, unit.atom.dipole).depth;
        } catch (const ConfigError&) {
            out.write_ramp = {};
            out.depth_per_density = 0.0;
        }
    }
    return out;
}

EmissionWindow detect_emission_window(const field::FieldGrid& output, double exclusion_end, double search_end,
                                      double floor_intensity, double edge_fraction) {
    const std::size_t n = output.size();
    std::size_t best = n;
    double peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = output.time(k);
        if (t <= exclusion_end || t > search_end) continue;
        const double v = std::norm(output.samples[k]);
        if (v > peak) {
            peak = v;
            best = k;
        }
    }
    if (best == n || !(peak >= floor_intensity) || peak == 0.0) {
        std::ostringstream msg;
        msg << "no emission above the detection floor after tau = " << units::au_to_fs(exclusion_end) << " fs";
        throw NoEmissionError(msg.str());
    }

    EmissionWindow w;
    w.peak_intensity = peak;
    w.t_peak = output.time(best);
    if (best > 0 && best + 1 < n) {
        const double a = std::norm(output.samples[best - 1]);
        const double c = std::norm(output.samples[best + 1]);
        const double denom = a - 2.0 * peak + c;
        if (denom < 0.0) w.t_peak += 0.5 * (a - c) / denom * output.dt;
    }
    const double edge = edge_fraction * peak;
    std::size_t lo = best;
    while (lo > 0 && output.time(lo - 1) > exclusion_end && std::norm(output.samples[lo]) >= edge) --lo;
    std::size_t hi = best;
    while (hi + 1 < n && output.time(hi + 1) <= search_end && std::norm(output.samples[hi]) >= edge) ++hi;
    w.t_a = output.time(lo);
    w.t_b = output.time(hi);
    return w;
}

double efficiency(const field::FieldGrid& input, const field::FieldGrid& output, double t_a, double t_b) {
    if (!(t_b > t_a)) throw ConfigError("efficiency window must have t_b > t_a");
    const double e_in = mb::energy(input);
    if (!(e_in > 0.0)) throw ConfigError("input field carries no energy");
    return mb::energy(output, t_a, t_b) / e_in;
}

double time_bandwidth(double storage_time, double signal_fwhm) {
    if (!(signal_fwhm > 0.0)) throw ConfigError("signal duration must be positive");
    return storage_time / signal_fwhm;
}

MemoryResult analyze(const field::FieldGrid& input, const field::FieldGrid& output, const field::SignalSpec& signal,
                     const WindowPolicy& window) {
    MemoryResult r;
    r.input = input;
    r.propagation.field_out = output;

    const double e_in = mb::energy(input);
    if (!(e_in > 0.0)) throw ConfigError("input field carries no energy");
    double peak_in = 0.0;
    for (const auto& s : input.samples) peak_in = std::max(peak_in, std::norm(s));

    const double half = exclusion_halfwidth(window, signal);
    const double excl_a = signal.center_time - half;
    const double excl_b = signal.center_time + half;
    const bool span_set = window.tau_end > window.tau_begin;
    const double span_a = span_set ? window.tau_begin : output.t0;
    const double span_b = span_set ? window.tau_end : output.time(output.size() - 1);

    r.transmitted_fraction = mb::energy(output, excl_a, excl_b) / e_in;
    try {
        const auto w = detect_emission_window(output, excl_b, span_b, window.emission_floor * peak_in,
                                              window.edge_fraction);
        r.emitted = true;
        r.t_a = w.t_a;
        r.t_b = w.t_b;
        r.storage_time = w.t_peak - signal.center_time;
        r.efficiency = efficiency(input, output, w.t_a, w.t_b);
        r.time_bandwidth_product = time_bandwidth(r.storage_time, signal.fwhm);
    } catch (const NoEmissionError&) {
        r.emitted = false;
    }
    const double total = mb::energy(output, span_a, span_b) / e_in;
    r.leakage_fraction = std::max(0.0, total - r.transmitted_fraction - r.efficiency);

    try {
        r.fringe_spacing = field::fringe_spacing(field::spectrum(output));
    } catch (const std::domain_error&) {
        r.fringe_spacing = 0.0;
    }
    return r;
}

MemoryResult run_memory(const ScenarioConfig& config) { return run_memory(config, prepare(config)); }

MemoryResult run_memory(const ScenarioConfig& config, const PreparedMedium& prepared) {
    config.validate();
    const auto input = field::make_signal(config.signal, prepared.grid);
    auto prop = mb::propagate(input, prepared.index, config.medium, config.propagation);
    auto result = analyze(input, prop.field_out, config.signal, config.window);
    result.propagation = std::move(prop);
    if (result.emitted && !result.propagation.history.empty()) {
        const double half = exclusion_halfwidth(config.window, config.signal);
        double best = -1.0;
        for (std::size_t h = 0; h < result.propagation.history.size(); ++h) {
            const auto& f = result.propagation.history[h];
            const double pre = mb::energy(f, config.signal.center_time - half, config.signal.center_time + half);
            const double post = mb::energy(f, result.t_a, result.t_b);
            if (std::min(pre, post) > best) {
                best = std::min(pre, post);
                result.fringe_plane_z = result.propagation.history_z[h];
                try {
                    result.fringe_spacing = field::fringe_spacing(field::spectrum(f));
                } catch (const std::domain_error&) {
                    result.fringe_spacing = 0.0;
                }
            }
        }
    }
    result.optical_depth = prepared.depth_per_density * config.medium.atomic_density;
    result.write_slope_sign = prepared.write_ramp.sign();
    return result;
}

std::vector<SweepPoint> sweep_optical_depth(const ScenarioConfig& base, std::span<const double> depths,
                                            int threads) {
    for (double d : depths) {
        if (!(d >= 0.0)) throw ConfigError("optical depths must be non-negative");
    }
    const auto prepared = prepare(base);
    if (!(prepared.depth_per_density > 0.0)) {
        throw ConfigError("no index ramp under the signal; optical depth cannot be mapped to N_a");
    }

    std::vector<SweepPoint> points(depths.size());
    std::vector<std::exception_ptr> errors(depths.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < depths.size(); i = next++) {
            try {
                auto cfg = base;
                cfg.medium.atomic_density = depths[i] / prepared.depth_per_density;
                cfg.propagation.store_every = 0;
                const auto r = run_memory(cfg, prepared);
                points[i] = {depths[i], cfg.medium.atomic_density, r.efficiency, r.emitted};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n_threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(1, depths.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return points;
}

}  // namespace molmem::protocol
