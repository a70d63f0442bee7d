#pragma once
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "opo/errors.hpp"

namespace opo {

enum class TraceLabel { combined, lo_shot, pump_shot, electronic };
const char* label_name(TraceLabel l);
TraceLabel parse_label(const std::string& s);

struct AnalyzerSettings {
    double rbw_hz = 100e3;
    double vbw_hz = 1e3;
    double center_hz = 6e6;
    bool operator==(const AnalyzerSettings&) const = default;
};

struct MeasuredTrace {
    TraceLabel label = TraceLabel::combined;
    AnalyzerSettings settings;
    std::vector<double> dbm;
    void validate() const;
};

enum TraceFlag : unsigned { flag_none = 0, flag_floor = 1 };

struct LinearTrace {
    AnalyzerSettings settings;
    std::vector<double> mw;
    std::vector<unsigned> flags;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// electronic level is the mean linear power of the electronic trace
LinearTrace dbm_to_linear(const MeasuredTrace& trace, const MeasuredTrace& electronic, double floor_mw = 1e-18);

struct DetectionChain {
    double eta_qe = 0.94;
    double visibility = 0.97;
    double eta_path = 1.0;
    double gamma = 0.0;     // inserted attenuator loss on the squeezed beam
    double I_W = 0.45e-3;   // reflected pump at the detectors, before the attenuator
    double I_LO_W = 1.2e-3;

    double efficiency() const { return eta_qe * visibility * visibility * eta_path * (1 - gamma); }
    double pump_at_detector() const { return I_W * (1 - gamma); }
    void validate() const;
};

double apply_efficiency(double S, double eta);

// Delta^2(i1 - i2) in units of shot noise per watt: I_LO S_det + I S_LO
double homodyne_variance(double S_theta, const DetectionChain& chain, double S_LO = 1.0);

struct NormalizedNoise {
    std::vector<double> N;
    std::vector<unsigned> flags;
};

NormalizedNoise normalize(const LinearTrace& N1, const LinearTrace& N2, const LinearTrace& N3);

double apply_loss(double N, double gamma);
double infer_source_noise(double N_measured, double eta);
double back_computed_path_efficiency(double measured, double inferred, double eta_qe, double visibility);

MeasuredTrace read_trace(const std::string& path);
void write_trace(const std::string& path, const MeasuredTrace& t);

struct SyntheticTraces {
    MeasuredTrace n1, n2, n3, electronic;
};

// shot_mw_per_w: analyzer power of one watt of shot noise
SyntheticTraces synthesize_traces(const std::vector<double>& S_theta, const DetectionChain& chain,
                                  const AnalyzerSettings& settings, double electronic_dbm = -102.6,
                                  double shot_mw_per_w = 1e-6);

struct ReductionReport {
    double min_N = 0, max_N = 0, span = 0;
    std::size_t argmin = 0, floored = 0;
    double eta = 0, eta_qe = 0, visibility = 0, eta_path = 0, gamma = 0;
    double source_min = 0;  // infer_source_noise(min_N)
};

ReductionReport reduction_report(const NormalizedNoise& n, const DetectionChain& chain);

}  // namespace opo
