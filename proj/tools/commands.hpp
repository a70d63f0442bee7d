#pragma once
#include <cstdint>
#include <filesystem>
#include "json.hpp"
#include <optional>
#include <string>
#include <vector>

#include "opo/config.hpp"

namespace opo::cli {

inline constexpr const char* tool_version = "1.0.0";

// everything a command needs; serialized into the manifest
struct Options {
    std::string command;
    std::string config;  // empty: built-in defaults
    std::string out = ".";
    double temp_offset_c = 0;
    double pump_ratio = 8;
    std::optional<double> window_um;  // default: one pump free spectral range
    double step_nm = 0.05;
    std::string policy = "lowest";
    bool reverse = false;
    double omega_mhz = 6;
    std::optional<double> gamma;
    std::uint64_t seed = 1;
    std::vector<double> period_um, temp_c;
    std::string n1, n2, n3, electronic;
    std::size_t samples = 200;
    double s_min = 0.6, s_max = 2.0;
    std::size_t mc_samples = 4'000'000;
};

nlohmann::json to_json(const Options& o);
Options options_from_json(const nlohmann::json& j);

// runs the command, writes outputs and manifest.json into o.out, returns output file names
std::vector<std::string> run(const Options& o, const Setup& setup);

// replays a manifest into a new output directory
std::vector<std::string> replay(const std::string& manifest_path, const std::string& out);

}  // namespace opo::cli
