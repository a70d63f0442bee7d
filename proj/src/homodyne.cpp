#include "opo/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace opo {

const char* label_name(TraceLabel l) {
    switch (l) {
        case TraceLabel::combined: return "N1";
        case TraceLabel::lo_shot: return "N2";
        case TraceLabel::pump_shot: return "N3";
        case TraceLabel::electronic: return "electronic";
    }
    return "?";
}

TraceLabel parse_label(const std::string& s) {
    if (s == "N1") return TraceLabel::combined;
    if (s == "N2") return TraceLabel::lo_shot;
    if (s == "N3") return TraceLabel::pump_shot;
    if (s == "electronic") return TraceLabel::electronic;
    throw DataError("unknown trace label '" + s + "'");
}

void MeasuredTrace::validate() const {
    if (!(settings.rbw_hz > 0) || !(settings.vbw_hz > 0)) throw DataError("analyzer bandwidths must be positive");
    for (std::size_t i = 0; i < dbm.size(); ++i)
        if (!std::isfinite(dbm[i])) throw DataError("non-finite dBm at sample " + std::to_string(i));
}

LinearTrace dbm_to_linear(const MeasuredTrace& trace, const MeasuredTrace& electronic, double floor_mw) {
    trace.validate();
    electronic.validate();
    if (!(trace.settings == electronic.settings))
        throw DataError(std::string("analyzer settings of ") + label_name(trace.label) +
                        " differ from the electronic-noise trace");
    if (electronic.dbm.empty()) throw DataError("electronic trace is empty");
    double e = 0;
    for (double v : electronic.dbm) e += dbm_to_mw(v);
    e /= double(electronic.dbm.size());

    LinearTrace out{trace.settings, {}, {}};
    out.mw.reserve(trace.dbm.size());
    for (double v : trace.dbm) {
        const double x = dbm_to_mw(v) - e;
        if (x <= floor_mw) {
            out.mw.push_back(floor_mw);
            out.flags.push_back(flag_floor);
        } else {
            out.mw.push_back(x);
            out.flags.push_back(flag_none);
        }
    }
    return out;
}

void DetectionChain::validate() const {
    for (double x : {eta_qe, visibility, eta_path})
        if (!(x > 0 && x <= 1)) throw DomainError("detection efficiencies must lie in (0,1]");
    if (!(gamma >= 0 && gamma < 1)) throw DomainError("attenuator loss must lie in [0,1)");
    if (I_W < 0 || !(I_LO_W > 0)) throw DomainError("beam powers must be positive");
}

double apply_efficiency(double S, double eta) { return eta * S + 1 - eta; }

double homodyne_variance(double S_theta, const DetectionChain& chain, double S_LO) {
    chain.validate();
    return chain.I_LO_W * apply_efficiency(S_theta, chain.efficiency()) + chain.pump_at_detector() * S_LO;
}

NormalizedNoise normalize(const LinearTrace& N1, const LinearTrace& N2, const LinearTrace& N3) {
    if (!(N1.settings == N2.settings) || !(N1.settings == N3.settings))
        throw DataError("N1, N2, N3 were taken with different analyzer settings");
    const std::size_t n = N1.mw.size();
    if (N2.mw.size() != n || N3.mw.size() != n) throw DataError("N1, N2, N3 differ in length");
    NormalizedNoise out;
    out.N.resize(n);
    out.flags.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(N2.mw[i] > 0)) throw DataError("N2 <= 0 at sample " + std::to_string(i));
        out.N[i] = (N1.mw[i] - N3.mw[i]) / N2.mw[i];
        auto f = [&](const LinearTrace& t) { return t.flags.empty() ? 0u : t.flags[i]; };
        out.flags[i] = f(N1) | f(N2) | f(N3);
    }
    return out;
}

double apply_loss(double N, double gamma) {
    if (!(gamma >= 0 && gamma < 1)) throw DomainError("loss must lie in [0,1)");
    return N + gamma * (1 - N);
}

double infer_source_noise(double N_measured, double eta) {
    if (!(eta > 0 && eta <= 1)) throw DomainError("efficiency must lie in (0,1]");
    const double s = 1 + (N_measured - 1) / eta;
    if (!(s > 0)) throw DomainError("inferred source noise <= 0: efficiency overestimated");
    return s;
}

double back_computed_path_efficiency(double measured, double inferred, double eta_qe, double visibility) {
    if (!(inferred < 1) || !(measured < 1)) throw DomainError("back-computation needs noise below shot noise");
    const double eta = (1 - measured) / (1 - inferred);
    return eta / (eta_qe * visibility * visibility);
}

MeasuredTrace read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open trace file " + path);
    MeasuredTrace t;
    bool have_label = false, have_rbw = false, have_vbw = false, have_center = false, header = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            std::string key = line.substr(1, colon - 1), val = line.substr(colon + 1);
            auto trim = [](std::string s) {
                s.erase(0, s.find_first_not_of(" \t"));
                s.erase(s.find_last_not_of(" \t\r") + 1);
                return s;
            };
            key = trim(key);
            val = trim(val);
            try {
                if (key == "label") t.label = parse_label(val), have_label = true;
                else if (key == "rbw_hz") t.settings.rbw_hz = std::stod(val), have_rbw = true;
                else if (key == "vbw_hz") t.settings.vbw_hz = std::stod(val), have_vbw = true;
                else if (key == "center_hz") t.settings.center_hz = std::stod(val), have_center = true;
            } catch (const std::logic_error&) {
                throw DataError(path + ":" + std::to_string(lineno) + ": bad value for " + key);
            }
            continue;
        }
        if (!header) {
            if (line.rfind("index,dbm", 0) != 0) throw DataError(path + ": expected 'index,dbm' column header");
            header = true;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) throw DataError(path + ":" + std::to_string(lineno) + ": expected index,dbm");
        try {
            t.dbm.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::logic_error&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad dBm value");
        }
    }
    if (!have_label || !have_rbw || !have_vbw || !have_center)
        throw DataError(path + ": header must carry label, rbw_hz, vbw_hz and center_hz");
    t.validate();
    return t;
}

void write_trace(const std::string& path, const MeasuredTrace& t) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write trace file " + path);
    out << std::setprecision(17);
    out << "# label: " << label_name(t.label) << "\n";
    out << "# rbw_hz: " << t.settings.rbw_hz << "\n";
    out << "# vbw_hz: " << t.settings.vbw_hz << "\n";
    out << "# center_hz: " << t.settings.center_hz << "\n";
    out << "index,dbm\n";
    for (std::size_t i = 0; i < t.dbm.size(); ++i) out << i << "," << t.dbm[i] << "\n";
}

SyntheticTraces synthesize_traces(const std::vector<double>& S_theta, const DetectionChain& chain,
                                  const AnalyzerSettings& settings, double electronic_dbm, double shot_mw_per_w) {
    chain.validate();
    SyntheticTraces s;
    s.n1 = {TraceLabel::combined, settings, {}};
    s.n2 = {TraceLabel::lo_shot, settings, {}};
    s.n3 = {TraceLabel::pump_shot, settings, {}};
    s.electronic = {TraceLabel::electronic, settings, {}};
    const double e = dbm_to_mw(electronic_dbm);
    for (double S : S_theta) {
        s.n1.dbm.push_back(mw_to_dbm(shot_mw_per_w * homodyne_variance(S, chain) + e));
        s.n2.dbm.push_back(mw_to_dbm(shot_mw_per_w * chain.I_LO_W + e));
        s.n3.dbm.push_back(mw_to_dbm(shot_mw_per_w * chain.pump_at_detector() + e));
        s.electronic.dbm.push_back(electronic_dbm);
    }
    return s;
}

ReductionReport reduction_report(const NormalizedNoise& n, const DetectionChain& chain) {
    if (n.N.empty()) throw DataError("no samples to report");
    ReductionReport r;
    auto mm = std::minmax_element(n.N.begin(), n.N.end());
    r.min_N = *mm.first;
    r.max_N = *mm.second;
    r.span = r.max_N - r.min_N;
    r.argmin = std::size_t(mm.first - n.N.begin());
    r.floored = std::size_t(std::count_if(n.flags.begin(), n.flags.end(), [](unsigned f) { return f & flag_floor; }));
    r.eta = chain.efficiency();
    r.eta_qe = chain.eta_qe;
    r.visibility = chain.visibility;
    r.eta_path = chain.eta_path;
    r.gamma = chain.gamma;
    r.source_min = infer_source_noise(r.min_N, r.eta);
    return r;
}

}  // namespace opo
