#pragma once

// Run configuration: a YAML document in lab units. Every unit-bearing key
// carries its unit as a suffix (`center_fs`, `length_cm`, ...). Unknown keys
// are rejected with the offending line.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "molmem/protocol.hpp"

namespace molmem::config {

struct AlignGrid {
    double t_begin = 0.0;  // a.u.
    double t_end = 0.0;
    double dt = 0.0;
};

struct RampSearch {
    double begin = 0.0;  // a.u.
    double end = 0.0;
};

struct RunConfig {
    protocol::ScenarioConfig scenario;
    bool has_signal = false;
    bool has_propagation = false;
    bool has_window = false;
    std::optional<AlignGrid> align;
    std::optional<RampSearch> ramp;
    std::vector<double> sweep_depths;
    double spectrum_omega_min = 0.0;  // a.u.
    double spectrum_omega_max = 0.0;
    // Fully resolved document in lab units, defaults included.
    nlohmann::ordered_json echo;
};

struct LoadOptions {
    double grid_scale = 1.0;  // coarsens every grid: steps times scale, z steps divided by it
    int threads = 1;
};

// Throws ConfigError with "<source>:<line>: ..." messages.
RunConfig load_string(const std::string& text, const LoadOptions& options = {},
                      const std::string& source = "config");
RunConfig load_file(const std::string& path, const LoadOptions& options = {});

// Throws ConfigError naming the missing section.
void require_scenario(const RunConfig& config);

}  // namespace molmem::config
