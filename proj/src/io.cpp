#include "molmem/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "molmem/units.hpp"

namespace molmem::io {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

namespace {

template <class Row>
std::string table(const std::string& header, std::size_t rows, Row row) {
    std::string out = header + "\n";
    out.reserve(rows * 64);
    for (std::size_t k = 0; k < rows; ++k) {
        out += row(k);
        out += '\n';
    }
    return out;
}

}  // namespace

std::string alignment_csv(const rotor::AlignmentTrace& trace) {
    const auto g = trace.grid();
    return table("t_fs,cos2_expectation", trace.values.size(), [&](std::size_t k) {
        return format_number(units::au_to_fs(g.time(k))) + "," + format_number(trace.values[k]);
    });
}

std::string index_csv(const medium::IndexTrace& index) {
    return table("t_fs,n_minus_1", index.n_values.size(), [&](std::size_t k) {
        return format_number(units::au_to_fs(index.time(k))) + "," + format_number(index.n_values[k] - 1.0);
    });
}

std::string field_csv(const field::FieldGrid& f) {
    return table("tau_fs,re_E,im_E", f.size(), [&](std::size_t k) {
        return format_number(units::au_to_fs(f.time(k))) + "," + format_number(f.samples[k].real()) + "," +
               format_number(f.samples[k].imag());
    });
}

std::string spectrum_csv(const field::Spectrum& s, double omega_min, double omega_max) {
    std::string out = "omega_ev,amplitude\n";
    for (std::size_t k = 0; k < s.omega.size(); ++k) {
        if (s.omega[k] < omega_min || s.omega[k] > omega_max) continue;
        out += format_number(units::au_to_ev(s.omega[k])) + "," + format_number(std::abs(s.amplitude[k])) + "\n";
    }
    return out;
}

std::string spectrogram_csv(const field::SpectrogramMap& map, const std::string& axis_label) {
    std::string out = axis_label + "/omega_ev";
    for (double w : map.omega) out += "," + format_number(units::au_to_ev(w));
    out += "\n";
    const bool z_axis = map.axis_name == "z";
    for (std::size_t r = 0; r < map.axis.size(); ++r) {
        out += format_number(z_axis ? units::au_to_cm(map.axis[r]) : units::au_to_fs(map.axis[r]));
        for (double v : map.values[r]) out += "," + format_number(v);
        out += "\n";
    }
    return out;
}

std::string sweep_csv(const std::vector<protocol::SweepPoint>& points) {
    return table("optical_depth,efficiency", points.size(), [&](std::size_t k) {
        return format_number(points[k].optical_depth) + "," + format_number(points[k].efficiency);
    });
}

json ramp_json(const medium::RampSegment& ramp) {
    json j;
    j["t_start_fs"] = units::au_to_fs(ramp.t_start);
    j["t_end_fs"] = units::au_to_fs(ramp.t_end);
    j["slope_per_fs"] = ramp.slope / units::au_to_fs(1.0);
    j["residual"] = ramp.residual;
    return j;
}

json memory_result_json(const protocol::MemoryResult& r, const json& config_echo) {
    json j;
    j["efficiency"] = r.efficiency;
    j["storage_time_fs"] = units::au_to_fs(r.storage_time);
    j["t_a_fs"] = units::au_to_fs(r.t_a);
    j["t_b_fs"] = units::au_to_fs(r.t_b);
    j["leakage_fraction"] = r.leakage_fraction;
    j["time_bandwidth_product"] = r.time_bandwidth_product;
    j["emitted"] = r.emitted;
    j["transmitted_fraction"] = r.transmitted_fraction;
    j["optical_depth"] = r.optical_depth;
    j["write_slope_sign"] = r.write_slope_sign;
    j["fringe_spacing_ev"] = units::au_to_ev(r.fringe_spacing);
    j["fringe_plane_cm"] = units::au_to_cm(r.fringe_plane_z);
    j["max_physicality_excess"] = r.propagation.max_physicality_excess;
    j["config_echo"] = config_echo;
    return j;
}

json diagnostics_json(const mb::PropagationResult& p) {
    json j;
    json z = json::array();
    json e = json::array();
    for (double v : p.energy_z) z.push_back(units::au_to_cm(v));
    for (double v : p.energy) e.push_back(v);
    j["z_cm"] = z;
    j["energy"] = e;
    json rel = json::array();
    for (double v : p.energy) rel.push_back(p.energy.empty() || p.energy.front() == 0.0 ? 0.0 : v / p.energy.front());
    j["energy_relative"] = rel;
    j["max_physicality_excess"] = p.max_physicality_excess;
    j["convergence_change"] = p.convergence_change;
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace molmem::io
