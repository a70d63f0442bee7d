#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "opo/noise.hpp"
#include "opo/steady_state.hpp"

namespace opo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json to_json(const Options& o) {
    json j;
    j["command"] = o.command;
    j["config"] = o.config;
    j["temp_offset_c"] = o.temp_offset_c;
    j["pump_ratio"] = o.pump_ratio;
    j["window_um"] = o.window_um ? json(*o.window_um) : json(nullptr);
    j["step_nm"] = o.step_nm;
    j["policy"] = o.policy;
    j["reverse"] = o.reverse;
    j["omega_mhz"] = o.omega_mhz;
    j["gamma"] = o.gamma ? json(*o.gamma) : json(nullptr);
    j["seed"] = o.seed;
    j["period_um"] = o.period_um;
    j["temp_c"] = o.temp_c;
    j["n1"] = o.n1;
    j["n2"] = o.n2;
    j["n3"] = o.n3;
    j["electronic"] = o.electronic;
    j["samples"] = o.samples;
    j["s_min"] = o.s_min;
    j["s_max"] = o.s_max;
    j["mc_samples"] = o.mc_samples;
    return j;
}

Options options_from_json(const nlohmann::json& j) {
    Options o;
    try {
        o.command = j.at("command").get<std::string>();
        o.config = j.at("config").get<std::string>();
        o.temp_offset_c = j.at("temp_offset_c").get<double>();
        o.pump_ratio = j.at("pump_ratio").get<double>();
        if (!j.at("window_um").is_null()) o.window_um = j.at("window_um").get<double>();
        o.step_nm = j.at("step_nm").get<double>();
        o.policy = j.at("policy").get<std::string>();
        o.reverse = j.at("reverse").get<bool>();
        o.omega_mhz = j.at("omega_mhz").get<double>();
        if (!j.at("gamma").is_null()) o.gamma = j.at("gamma").get<double>();
        o.seed = j.at("seed").get<std::uint64_t>();
        o.period_um = j.at("period_um").get<std::vector<double>>();
        o.temp_c = j.at("temp_c").get<std::vector<double>>();
        o.n1 = j.at("n1").get<std::string>();
        o.n2 = j.at("n2").get<std::string>();
        o.n3 = j.at("n3").get<std::string>();
        o.electronic = j.at("electronic").get<std::string>();
        o.samples = j.at("samples").get<std::size_t>();
        o.s_min = j.at("s_min").get<double>();
        o.s_max = j.at("s_max").get<double>();
        o.mc_samples = j.at("mc_samples").get<std::size_t>();
    } catch (const json::exception& e) {
        throw DataError(std::string("manifest arguments: ") + e.what());
    }
    return o;
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class Csv {
public:
    Csv(const fs::path& path, const std::string& header) : f_(path, std::ios::binary) {
        if (!f_) throw DataError("cannot write " + path.string());
        f_ << header << '\n';
    }
    template <typename... T>
    void row(const T&... v) {
        bool first = true;
        ((f_ << (first ? "" : ",") << cell(v), first = false), ...);
        f_ << '\n';
    }

private:
    static std::string cell(double v) { return num(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(unsigned v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    std::ofstream f_;
};

struct Condition {
    double T, P_th, P_in, L_ref;
    CavitySpec cav;
};

Condition condition(const Options& o, const Setup& s) {
    if (!(o.pump_ratio >= 0)) throw ArgumentError("--pump-ratio must be >= 0");
    Condition c;
    c.T = qpm_temperature(s) + o.temp_offset_c;
    c.cav = at_temperature(s, c.T);
    c.P_th = minimum_threshold(c.T, c.cav);
    c.P_in = o.pump_ratio * c.P_th;
    c.L_ref = degenerate_resonance_length(c.T, c.cav);
    return c;
}

ScanWindow window(const Options& o, const Condition& c) {
    const double width = o.window_um ? *o.window_um * 1e-6 : c.cav.lambda0 / 2;
    if (!(width > 0)) throw ArgumentError("--window-um must be positive");
    if (!(o.step_nm > 0)) throw ArgumentError("--step-nm must be positive");
    return {c.L_ref, -width / 2, width / 2, o.step_nm * 1e-9, o.reverse};
}

Policy policy(const std::string& name) {
    if (name == "lowest") return Policy::lowest_threshold;
    if (name == "sticky") return Policy::sticky;
    throw ArgumentError("--policy must be 'lowest' or 'sticky'");
}

void write_scan(const fs::path& path, const ScanTrace& tr) {
    Csv csv(path, "L_offset_um,p,dnu_THz,signal_intensity,reflected_pump_mW,hop_flag");
    for (const auto& s : tr.samples)
        csv.row(s.L_offset * 1e6, s.p, s.dnu_THz, s.signal_intensity, s.reflected_pump_W * 1e3, s.hop);
}

std::vector<std::string> cmd_dispersion(const Options& o, const Setup& s, const fs::path& out) {
    if (o.period_um.empty() && o.temp_c.empty())
        throw ArgumentError("dispersion needs a non-empty --period-um or --temp-c sweep");
    std::vector<std::string> files;
    const auto& cr = s.cavity.crystal;
    const double w0 = s.cavity.w0();
    if (!o.period_um.empty()) {
        Csv csv(out / "dispersion_period.csv", "Lambda_um,T_QPM_C");
        for (double L : o.period_um) {
            double T = NAN;
            try {
                T = degeneracy_temperature(L * 1e-6, cr, s.cavity.lambda0);
            } catch (const NotFoundError&) {
                // no degeneracy inside the temperature window
            }
            csv.row(L, T);
        }
        files.push_back("dispersion_period.csv");
    }
    if (!o.temp_c.empty()) {
        Csv csv(out / "dispersion_temperature.csv", "T_C,delta_k_bulk_per_m,delta_kappa_per_m,chi_qpm_abs,chi_round_trip_abs");
        for (double T : o.temp_c) {
            const auto c = qpm_coupling(w0 / 2, w0 / 2, T, cr);
            csv.row(T, c.delta_k, c.delta_kappa, std::abs(c.chi), std::abs(round_trip_coupling(c, T, cr)));
        }
        files.push_back("dispersion_temperature.csv");
    }
    return files;
}

std::vector<std::string> cmd_scan(const Options& o, const Setup& s, const fs::path& out) {
    const Condition c = condition(o, s);
    const auto tr = scan_cavity(window(o, c), c.T, c.P_in, policy(o.policy), c.cav);
    write_scan(out / "scan.csv", tr);
    return {"scan.csv"};
}

std::vector<std::string> cmd_noise(const Options& o, const Setup& s, const fs::path& out) {
    if (!(o.omega_mhz > 0)) throw ArgumentError("--omega-mhz must be positive");
    const Condition c = condition(o, s);
    const double Om = omega_from_hz(o.omega_mhz * 1e6, c.cav, c.T);
    const auto tr = squeezing_scan(window(o, c), c.T, c.P_in, Om, c.cav);
    Csv csv(out / "noise.csv", "L_offset_um,p,S_min,theta_min_rad,S_intensity,physical");
    for (const auto& n : tr.samples) csv.row(n.L_offset * 1e6, n.p, n.S_min, n.theta_min, n.S_intensity, n.physical);
    write_scan(out / "scan.csv", tr.scan);
    return {"noise.csv", "scan.csv"};
}

std::vector<std::string> cmd_mc(const Options& o, const Setup& s, const fs::path& out) {
    if (!(o.omega_mhz > 0)) throw ArgumentError("--omega-mhz must be positive");
    const Condition c = condition(o, s);
    CavitySpec cav = c.cav;
    cav.L_cav = c.L_ref;
    const ModeSolution ms = make_mode(0, c.L_ref, c.T, cav);
    const auto br = solve_steady(PumpDrive::from_power(c.P_in, cav.w0()), ms.detunings, ms, cav);
    const auto m = linearize(br.back(), cav);
    const double Om = omega_from_hz(o.omega_mhz * 1e6, cav, c.T);
    const auto sq = optimum_squeezing(m, Om);
    Csv csv(out / "mc.csv", "theta_rad,S_mc,stderr,S_exact,samples");
    std::uint64_t seed = o.seed;
    for (double th : {sq.theta_min, sq.theta_min + pi / 2}) {
        const auto e = langevin_spectrum_mc(m, th, Om, o.mc_samples, seed++);
        csv.row(th, e.S, e.stderr_, e.exact, e.samples);
    }
    return {"mc.csv"};
}

std::vector<std::string> cmd_reduce(const Options& o, const Setup& s, const fs::path& out) {
    for (const auto* f : {&o.n1, &o.n2, &o.n3, &o.electronic})
        if (f->empty()) throw ArgumentError("reduce needs --n1, --n2, --n3 and --electronic");
    const auto n1 = read_trace(o.n1), n2 = read_trace(o.n2), n3 = read_trace(o.n3), el = read_trace(o.electronic);
    const std::pair<const MeasuredTrace*, TraceLabel> want[] = {
        {&n1, TraceLabel::combined}, {&n2, TraceLabel::lo_shot}, {&n3, TraceLabel::pump_shot}, {&el, TraceLabel::electronic}};
    for (const auto& [t, l] : want)
        if (t->label != l)
            throw DataError(std::string("trace labelled ") + label_name(t->label) + " where " + label_name(l) + " was expected");
    const auto nn = normalize(dbm_to_linear(n1, el), dbm_to_linear(n2, el), dbm_to_linear(n3, el));
    {
        Csv csv(out / "normalized.csv", "phase_index,N,flags");
        for (std::size_t i = 0; i < nn.N.size(); ++i) csv.row(i, nn.N[i], nn.flags[i]);
    }
    std::vector<std::string> files{"normalized.csv"};
    if (o.gamma) {
        Csv csv(out / "loss.csv", "phase_index,N_loss,flags");
        for (std::size_t i = 0; i < nn.N.size(); ++i) csv.row(i, apply_loss(nn.N[i], *o.gamma), nn.flags[i]);
        files.push_back("loss.csv");
    }
    const auto r = reduction_report(nn, s.chain);
    json rep;
    rep["min_N"] = r.min_N;
    rep["max_N"] = r.max_N;
    rep["quadrature_span"] = r.span;
    rep["argmin"] = r.argmin;
    rep["floored_samples"] = r.floored;
    rep["inferred_source_min"] = r.source_min;
    rep["efficiency"] = {{"total", r.eta}, {"eta_qe", r.eta_qe}, {"visibility", r.visibility}, {"eta_path", r.eta_path},
                         {"gamma", r.gamma}, {"eta_path_back_computed", s.eta_path_back_computed}};
    if (o.gamma) rep["apply_loss_gamma"] = *o.gamma;
    std::ofstream(out / "report.json", std::ios::binary) << rep.dump(2) << '\n';
    files.push_back("report.json");
    return files;
}

std::vector<std::string> cmd_synth(const Options& o, const Setup& s, const fs::path& out) {
    if (o.samples < 2) throw ArgumentError("--samples must be >= 2");
    if (!(o.s_min > 0) || !(o.s_max >= o.s_min)) throw ArgumentError("need 0 < --s-min <= --s-max");
    DetectionChain chain = s.chain;
    if (o.gamma) chain.gamma = *o.gamma;
    chain.validate();
    // the seed fixes the LO phase at the first sample
    std::uint64_t z = o.seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    const double theta0 = double(z >> 11) * 0x1.0p-53 * pi;

    std::vector<double> S(o.samples);
    Csv planted(out / "planted.csv", "phase_index,theta_rad,S");
    for (std::size_t k = 0; k < o.samples; ++k) {
        const double th = 2 * pi * double(k) / double(o.samples) - theta0, c = std::cos(th), sn = std::sin(th);
        S[k] = o.s_min * c * c + o.s_max * sn * sn;
        planted.row(k, th, S[k]);
    }
    const auto tr = synthesize_traces(S, chain, AnalyzerSettings{});
    write_trace((out / "n1.csv").string(), tr.n1);
    write_trace((out / "n2.csv").string(), tr.n2);
    write_trace((out / "n3.csv").string(), tr.n3);
    write_trace((out / "electronic.csv").string(), tr.electronic);
    return {"planted.csv", "n1.csv", "n2.csv", "n3.csv", "electronic.csv"};
}

void write_manifest(const Options& o, const Setup& s, const fs::path& out, const std::vector<std::string>& files) {
    json m;
    m["tool"] = "opo";
    m["version"] = tool_version;
    m["command"] = o.command;
    m["seed"] = o.seed;
    m["arguments"] = to_json(o);
    m["config"] = s.resolved;
    m["outputs"] = files;
    std::ofstream f(out / "manifest.json", std::ios::binary);
    if (!f) throw DataError("cannot write manifest in " + out.string());
    f << m.dump(2) << '\n';
}

}  // namespace

std::vector<std::string> run(const Options& o, const Setup& setup) {
    const fs::path out = o.out;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw DataError("cannot create output directory " + out.string() + ": " + ec.message());
    static const std::map<std::string, std::vector<std::string> (*)(const Options&, const Setup&, const fs::path&)> table{
        {"dispersion", cmd_dispersion}, {"scan", cmd_scan},   {"noise", cmd_noise},
        {"mc", cmd_mc},                 {"reduce", cmd_reduce}, {"synth-traces", cmd_synth}};
    const auto it = table.find(o.command);
    if (it == table.end()) throw ArgumentError("unknown command " + o.command);
    auto files = it->second(o, setup, out);
    write_manifest(o, setup, out, files);
    return files;
}

std::vector<std::string> replay(const std::string& manifest_path, const std::string& out) {
    std::ifstream f(manifest_path);
    if (!f) throw DataError("cannot read manifest " + manifest_path);
    json m;
    try {
        f >> m;
    } catch (const json::exception& e) {
        throw DataError("manifest " + manifest_path + ": " + e.what());
    }
    if (!m.contains("arguments") || !m.contains("config")) throw DataError("manifest lacks arguments or config");
    Options o = options_from_json(m["arguments"]);
    o.out = out;
    const Setup s = setup_from_values(m["config"].get<std::map<std::string, std::string>>());
    return run(o, s);
}

}  // namespace opo::cli
