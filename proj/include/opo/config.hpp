#pragma once
#include <map>
#include <optional>
#include <string>

#include "opo/cavity.hpp"
#include "opo/homodyne.hpp"

namespace opo {

struct Setup {
    CavitySpec cavity;
    FilterCavitySpec filter;
    DetectionChain chain;
    double min_threshold_W = 300e-6;
    bool calibrated = true;                  // d_eff from min_threshold_W
    std::optional<double> temperature_c;     // none: use T_QPM
    double reference_measured = 0.70;
    double reference_inferred = 0.62;
    bool eta_path_back_computed = true;
    std::map<std::string, std::string> resolved;  // section.key -> value as used
};

// throws DomainError naming the offending field
Setup load_setup(const std::string& path);
Setup default_setup();
// rebuild from a resolved snapshot (section.key -> value)
Setup setup_from_values(const std::map<std::string, std::string>& values);

// T_QPM for the configured grating period and pump
double qpm_temperature(const Setup& s);

// copy of the cavity with the crystal at temperature T
CavitySpec at_temperature(const Setup& s, double T);

}  // namespace opo
