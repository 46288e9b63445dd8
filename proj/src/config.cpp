#include "molmem/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "molmem/errors.hpp"
#include "molmem/units.hpp"

namespace molmem::config {

namespace {

using json = nlohmann::ordered_json;
constexpr double inf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& source, const YAML::Mark& mark, const std::string& what) {
    std::ostringstream msg;
    msg << source;
    if (mark.line >= 0) msg << ":" << mark.line + 1;
    msg << ": " << what;
    throw ConfigError(msg.str());
}

json number_to_json(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return json(v);
}

// One mapping node of the document. Keys are consumed through the typed
// getters; finish() rejects whatever was not consumed.
class Section {
public:
    Section(YAML::Node node, std::string name, const std::string& source, json& echo)
        : node_(std::move(node)), name_(std::move(name)), source_(source), echo_(echo) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) fail(source_, node_.Mark(), "section '" + name_ + "' must be a mapping");
        echo_ = json::object();
    }

    bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        used_.insert(key);
        double v;
        if (!has(key)) {
            if (!fallback) fail(source_, node_ ? node_.Mark() : YAML::Mark::null_mark(),
                                "section '" + name_ + "' is missing required key '" + key + "'");
            v = *fallback;
        } else {
            v = parse_number(node_[key], key);
        }
        echo_[key] = number_to_json(v);
        return v;
    }

    int integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
        const double v = number(key, fallback ? std::optional<double>(*fallback) : std::nullopt);
        if (v != std::floor(v) || std::abs(v) > 1e9) {
            fail(source_, has(key) ? node_[key].Mark() : node_.Mark(), "key '" + key + "' must be an integer");
        }
        echo_[key] = static_cast<int>(v);
        return static_cast<int>(v);
    }

    std::string text(const std::string& key, const std::string& fallback) {
        used_.insert(key);
        std::string v = fallback;
        if (has(key)) {
            const auto n = node_[key];
            if (!n.IsScalar()) fail(source_, n.Mark(), "key '" + key + "' must be a string");
            v = n.as<std::string>();
        }
        echo_[key] = v;
        return v;
    }

    std::vector<double> numbers(const std::string& key) {
        used_.insert(key);
        std::vector<double> out;
        if (!has(key)) fail(source_, node_.Mark(), "section '" + name_ + "' is missing required key '" + key + "'");
        const auto n = node_[key];
        if (!n.IsSequence()) fail(source_, n.Mark(), "key '" + key + "' must be a list of numbers");
        json arr = json::array();
        for (const auto& item : n) {
            out.push_back(parse_number(item, key));
            arr.push_back(number_to_json(out.back()));
        }
        echo_[key] = arr;
        return out;
    }

    // Overwrites the echoed value after post-processing (unit scaling etc.).
    void echo(const std::string& key, double v) { echo_[key] = number_to_json(v); }
    void echo(const std::string& key, int v) { echo_[key] = v; }

    const YAML::Mark mark(const std::string& key) const {
        return has(key) ? node_[key].Mark() : (node_ ? node_.Mark() : YAML::Mark::null_mark());
    }

    void finish() const {
        if (!node_ || !node_.IsMap()) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!used_.count(key)) {
                fail(source_, kv.first.Mark(), "unknown key '" + key + "' in section '" + name_ + "'");
            }
        }
    }

private:
    double parse_number(const YAML::Node& n, const std::string& key) const {
        if (!n.IsScalar()) fail(source_, n.Mark(), "key '" + key + "' must be a number");
        const auto s = n.Scalar();
        if (s == "inf" || s == ".inf" || s == "Infinity" || s == "infinity") return inf;
        try {
            return n.as<double>();
        } catch (const YAML::BadConversion&) {
            fail(source_, n.Mark(), "key '" + key + "' must be a number, got '" + s + "'");
        }
    }

    YAML::Node node_;
    std::string name_;
    const std::string& source_;
    json& echo_;
    std::set<std::string> used_;
};

void check(bool ok, const std::string& source, const YAML::Mark& mark, const std::string& what) {
    if (!ok) fail(source, mark, what);
}

}  // namespace

RunConfig load_string(const std::string& text, const LoadOptions& options, const std::string& source) {
    if (!(options.grid_scale > 0.0) || !std::isfinite(options.grid_scale)) {
        throw ConfigError("grid scale must be a positive number");
    }
    YAML::Node doc;
    try {
        doc = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        fail(source, e.mark, "malformed YAML: " + e.msg);
    }
    if (!doc || doc.IsNull()) throw ConfigError(source + ": empty configuration");
    if (!doc.IsMap()) fail(source, doc.Mark(), "top level must be a mapping of sections");

    static const std::set<std::string> known = {"molecule", "medium",      "atom",   "pulses", "signal", "propagation",
                                                "window",   "rotor",       "align",  "ramp",   "sweep",  "spectrum"};
    for (const auto& kv : doc) {
        const auto key = kv.first.as<std::string>();
        if (!known.count(key)) fail(source, kv.first.Mark(), "unknown section '" + key + "'");
    }
    if (!doc["molecule"]) throw ConfigError(source + ": missing required section 'molecule'");
    if (!doc["medium"]) throw ConfigError(source + ": missing required section 'medium'");

    RunConfig cfg;
    auto& sc = cfg.scenario;
    json& echo = cfg.echo;
    const double scale = options.grid_scale;

    {
        Section s(doc["molecule"], "molecule", source, echo["molecule"]);
        auto& m = sc.medium.molecule;
        m.name = s.text("name", "molecule");
        m.rotational_constant = units::wavenumber_to_au(s.number("rotational_constant_cm"));
        m.alpha_perp = units::angstrom3_to_au(s.number("alpha_perp_A3"));
        m.delta_alpha = units::angstrom3_to_au(s.number("delta_alpha_A3"));
        m.even_j_weight = s.number("spin_weight_even", 1.0);
        m.odd_j_weight = s.number("spin_weight_odd", 1.0);
        s.finish();
        try {
            m.validate();
        } catch (const ConfigError& e) {
            fail(source, doc["molecule"].Mark(), e.what());
        }
    }
    {
        Section s(doc["medium"], "medium", source, echo["medium"]);
        sc.medium.molecular_density = units::per_cm3_to_au(s.number("molecular_density_cm3"));
        sc.medium.atomic_density = units::per_cm3_to_au(s.number("atomic_density_cm3", 0.0));
        sc.temperature = s.number("temperature_K");
        check(sc.medium.molecular_density >= 0.0, source, s.mark("molecular_density_cm3"), "density must be non-negative");
        check(sc.medium.atomic_density >= 0.0, source, s.mark("atomic_density_cm3"), "density must be non-negative");
        check(sc.temperature > 0.0, source, s.mark("temperature_K"), "temperature must be positive");
        s.finish();
    }
    if (doc["atom"]) {
        Section s(doc["atom"], "atom", source, echo["atom"]);
        auto& a = sc.medium.atom;
        const bool by_nm = s.has("wavelength_nm");
        const bool by_ev = s.has("transition_ev");
        check(by_nm != by_ev, source, doc["atom"].Mark(), "give exactly one of 'wavelength_nm' or 'transition_ev'");
        if (by_nm) {
            const double nm = s.number("wavelength_nm");
            check(nm > 0.0, source, s.mark("wavelength_nm"), "wavelength must be positive");
            a.transition_omega = units::wavelength_nm_to_omega(nm);
            s.echo("transition_ev", units::au_to_ev(a.transition_omega));
        } else {
            a.transition_omega = units::ev_to_au(s.number("transition_ev"));
            check(a.transition_omega > 0.0, source, s.mark("transition_ev"), "transition energy must be positive");
        }
        a.dipole = s.number("dipole_ea0");
        check(a.dipole >= 0.0, source, s.mark("dipole_ea0"), "dipole must be non-negative");
        const double t1 = s.number("t1_fs", inf);
        const double t2 = s.number("t2_fs", inf);
        check(t1 > 0.0 && t2 > 0.0, source, doc["atom"].Mark(), "relaxation times must be positive");
        a.t1 = units::fs_to_au(t1);
        a.t2 = units::fs_to_au(t2);
        s.finish();
    }

    echo["pulses"] = json::array();
    if (const auto list = doc["pulses"]) {
        if (!list.IsSequence()) fail(source, list.Mark(), "'pulses' must be a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            json entry;
            Section s(list[i], "pulses[" + std::to_string(i) + "]", source, entry);
            const double center = s.number("center_fs");
            const double sigma = s.number("sigma_fs");
            const double intensity = s.number("intensity_W_cm2");
            check(sigma > 0.0, source, s.mark("sigma_fs"), "pulse sigma must be positive");
            check(intensity >= 0.0, source, s.mark("intensity_W_cm2"), "pulse intensity must be non-negative");
            s.finish();
            sc.pulses.push_back(rotor::PulseSpec::from_lab(center, sigma, intensity));
            echo["pulses"].push_back(entry);
        }
    }

    {
        Section s(doc["rotor"], "rotor", source, echo["rotor"]);
        auto& r = sc.rotor;
        const double step = s.number("max_step_fs", units::au_to_fs(r.max_step)) * scale;
        check(step > 0.0, source, s.mark("max_step_fs"), "rotor step must be positive");
        r.max_step = units::fs_to_au(step);
        s.echo("max_step_fs", step);
        r.basis_margin = s.integer("basis_margin", r.basis_margin);
        r.basis_increment = s.integer("basis_increment", r.basis_increment);
        r.basis_cap = s.integer("basis_cap", r.basis_cap);
        r.top_shell_tolerance = s.number("top_shell_tolerance", r.top_shell_tolerance);
        r.thermal_tolerance = s.number("thermal_tolerance", r.thermal_tolerance);
        r.norm_tolerance = s.number("norm_tolerance", r.norm_tolerance);
        check(r.basis_margin >= 0 && r.basis_increment > 0 && r.basis_cap > 0, source, doc["rotor"].Mark(),
              "rotor basis settings must be positive");
        check(r.thermal_tolerance > 0.0 && r.thermal_tolerance < 1.0, source, s.mark("thermal_tolerance"),
              "thermal tolerance must lie in (0, 1)");
        r.threads = std::max(1, options.threads);
        s.finish();
    }

    if (doc["signal"]) {
        cfg.has_signal = true;
        Section s(doc["signal"], "signal", source, echo["signal"]);
        auto& sig = sc.signal;
        sig.center_time = units::fs_to_au(s.number("center_fs"));
        sig.fwhm = units::fs_to_au(s.number("fwhm_fs"));
        sig.carrier_omega = units::ev_to_au(s.number("carrier_ev"));
        check(sig.fwhm > 0.0, source, s.mark("fwhm_fs"), "signal duration must be positive");
        check(sig.carrier_omega > 0.0, source, s.mark("carrier_ev"), "carrier must be positive");
        const bool absolute = s.has("amplitude_au");
        const bool relative = s.has("rabi_fraction");
        check(!(absolute && relative), source, doc["signal"].Mark(), "give at most one of 'amplitude_au' or 'rabi_fraction'");
        if (absolute) {
            sig.amplitude = s.number("amplitude_au");
        } else {
            const double frac = s.number("rabi_fraction", 1e-6);
            check(sc.medium.atom.dipole > 0.0, source, s.mark("rabi_fraction"),
                  "'rabi_fraction' needs an 'atom' section with a positive dipole");
            sig.amplitude = frac * sc.medium.atom.transition_omega / sc.medium.atom.dipole;
            s.echo("amplitude_au", sig.amplitude);
        }
        check(sig.amplitude >= 0.0, source, doc["signal"].Mark(), "signal amplitude must be non-negative");
        s.finish();
    }

    if (doc["propagation"]) {
        cfg.has_propagation = true;
        Section s(doc["propagation"], "propagation", source, echo["propagation"]);
        auto& p = sc.propagation;
        p.length = units::cm_to_au(s.number("length_cm"));
        const int steps = s.integer("z_steps");
        check(steps >= 1, source, s.mark("z_steps"), "z_steps must be at least 1");
        p.n_z_steps = std::max(1, static_cast<int>(std::ceil(steps / scale - 1e-9)));
        s.echo("z_steps", p.n_z_steps);
        const int every = s.integer("store_every", 0);
        check(every >= 0, source, s.mark("store_every"), "store_every must be non-negative");
        p.store_every = every == 0 ? 0 : std::max(1, static_cast<int>(std::lround(every / scale)));
        s.echo("store_every", p.store_every);
        p.bloch.substeps = s.integer("bloch_substeps", p.bloch.substeps);
        p.bloch.tolerance = s.number("bloch_tolerance", p.bloch.tolerance);
        p.derivative_band = s.number("derivative_band", p.derivative_band);
        p.convergence_tolerance = s.number("convergence_tolerance", 0.0);
        check(p.length > 0.0, source, s.mark("length_cm"), "length must be positive");
        check(p.bloch.substeps >= 1, source, s.mark("bloch_substeps"), "bloch_substeps must be at least 1");
        check(p.derivative_band > 0.0 && p.derivative_band <= 1.0, source, s.mark("derivative_band"),
              "derivative_band must lie in (0, 1]");
        s.finish();
    }

    if (doc["window"]) {
        cfg.has_window = true;
        Section s(doc["window"], "window", source, echo["window"]);
        auto& w = sc.window;
        w.tau_begin = units::fs_to_au(s.number("tau_begin_fs"));
        w.tau_end = units::fs_to_au(s.number("tau_end_fs"));
        check(w.tau_end > w.tau_begin, source, s.mark("tau_end_fs"), "tau_end_fs must exceed tau_begin_fs");
        const double dt_fs = s.number("dtau_fs", 0.0);
        check(dt_fs >= 0.0, source, s.mark("dtau_fs"), "dtau_fs must be non-negative");
        w.dtau = units::fs_to_au(dt_fs * scale);
        // Coarsening never crosses the carrier-resolution bound.
        if (cfg.has_signal) {
            const double bound =
                field::max_carrier_step(std::max(sc.signal.carrier_omega, sc.medium.atom.transition_omega));
            if (w.dtau > bound && scale > 1.0) w.dtau = std::max(bound, units::fs_to_au(dt_fs));
            if (w.dtau == 0.0) w.dtau = bound;
        }
        s.echo("dtau_fs", units::au_to_fs(w.dtau));
        w.guard_fraction = s.number("guard_fraction", w.guard_fraction);
        w.exclusion_halfwidth = units::fs_to_au(s.number("exclusion_halfwidth_fs", 0.0));
        w.ramp_search_halfwidth = units::fs_to_au(s.number("ramp_search_halfwidth_fs", 0.0));
        w.emission_floor = s.number("emission_floor", w.emission_floor);
        w.edge_fraction = s.number("edge_fraction", w.edge_fraction);
        check(w.guard_fraction >= 0.2, source, s.mark("guard_fraction"), "guard_fraction must be at least 0.2");
        s.finish();
    }

    if (doc["align"]) {
        Section s(doc["align"], "align", source, echo["align"]);
        AlignGrid g;
        g.t_begin = units::fs_to_au(s.number("t_begin_fs"));
        g.t_end = units::fs_to_au(s.number("t_end_fs"));
        const double dt_fs = s.number("dt_fs") * scale;
        check(g.t_end > g.t_begin, source, s.mark("t_end_fs"), "t_end_fs must exceed t_begin_fs");
        check(dt_fs > 0.0, source, s.mark("dt_fs"), "dt_fs must be positive");
        g.dt = units::fs_to_au(dt_fs);
        s.echo("dt_fs", dt_fs);
        s.finish();
        cfg.align = g;
    }

    if (doc["ramp"]) {
        Section s(doc["ramp"], "ramp", source, echo["ramp"]);
        RampSearch r;
        r.begin = units::fs_to_au(s.number("search_begin_fs"));
        r.end = units::fs_to_au(s.number("search_end_fs"));
        check(r.end > r.begin, source, s.mark("search_end_fs"), "search_end_fs must exceed search_begin_fs");
        s.finish();
        cfg.ramp = r;
    }

    if (doc["sweep"]) {
        Section s(doc["sweep"], "sweep", source, echo["sweep"]);
        cfg.sweep_depths = s.numbers("optical_depths");
        for (double d : cfg.sweep_depths) {
            check(d >= 0.0 && std::isfinite(d), source, s.mark("optical_depths"), "optical depths must be finite and >= 0");
        }
        s.finish();
    }

    {
        Section s(doc["spectrum"], "spectrum", source, echo["spectrum"]);
        cfg.spectrum_omega_min = units::ev_to_au(s.number("omega_min_ev", 0.0));
        const double hi = s.number("omega_max_ev", inf);
        cfg.spectrum_omega_max = std::isinf(hi) ? inf : units::ev_to_au(hi);
        check(cfg.spectrum_omega_max > cfg.spectrum_omega_min, source, doc["spectrum"] ? doc["spectrum"].Mark() : YAML::Mark::null_mark(),
              "omega_max_ev must exceed omega_min_ev");
        s.finish();
    }

    echo["grid_scale"] = scale;
    return cfg;
}

RunConfig load_file(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_string(buf.str(), options, path);
}

void require_scenario(const RunConfig& config) {
    if (!config.has_signal) throw ConfigError("this command needs a 'signal' section");
    if (!config.has_propagation) throw ConfigError("this command needs a 'propagation' section");
    if (!config.has_window) throw ConfigError("this command needs a 'window' section");
    if (config.scenario.medium.atom.transition_omega <= 0.0) throw ConfigError("this command needs an 'atom' section");
    config.scenario.validate();
}

}  // namespace molmem::config
