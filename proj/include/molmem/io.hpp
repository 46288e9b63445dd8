#pragma once

// Text serialisation of results. Numbers are written with 17 significant
// digits; files are replaced atomically.

#include <string>
#include <vector>

#include <json.hpp>

#include "molmem/field.hpp"
#include "molmem/maxwell_bloch.hpp"
#include "molmem/medium.hpp"
#include "molmem/protocol.hpp"
#include "molmem/rotor.hpp"

namespace molmem::io {

using json = nlohmann::ordered_json;

std::string format_number(double v);

// Writes to "<path>.tmp" and renames over `path`.
void write_atomic(const std::string& path, const std::string& contents);

std::string alignment_csv(const rotor::AlignmentTrace& trace);    // t_fs, cos2_expectation
std::string index_csv(const medium::IndexTrace& index);           // t_fs, n_minus_1
std::string field_csv(const field::FieldGrid& field);             // tau_fs, re_E, im_E
// omega_ev, amplitude (|A|), restricted to [omega_min, omega_max]
std::string spectrum_csv(const field::Spectrum& spectrum, double omega_min, double omega_max);
// First row: "<axis>/omega_ev" then the frequency axis; each following row
// starts with its axis value.
std::string spectrogram_csv(const field::SpectrogramMap& map, const std::string& axis_label);
std::string sweep_csv(const std::vector<protocol::SweepPoint>& points);  // optical_depth, efficiency

json ramp_json(const medium::RampSegment& ramp);
json memory_result_json(const protocol::MemoryResult& result, const json& config_echo);
json diagnostics_json(const mb::PropagationResult& result);

// Two-space indentation and a trailing newline.
std::string dump(const json& j);

}  // namespace molmem::io
