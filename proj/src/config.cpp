#include "opo/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <sstream>

#include "opo/steady_state.hpp"

namespace opo {

namespace {

namespace pt = boost::property_tree;

class Reader {
public:
    Reader(const pt::ptree* tree, Setup& s) : tree_(tree), s_(s) {}

    double num(const std::string& key, double fallback) {
        double v = fallback;
        if (tree_) {
            if (auto node = tree_->get_optional<std::string>(key)) {
                try {
                    std::size_t pos = 0;
                    v = std::stod(*node, &pos);
                    if (pos != node->size()) throw std::invalid_argument(key);
                } catch (const std::logic_error&) {
                    throw DomainError("config field " + key + ": not a number ('" + *node + "')");
                }
            }
        }
        record(key, v);
        return v;
    }

    std::optional<double> opt(const std::string& key) {
        if (!tree_) return std::nullopt;
        if (!tree_->get_optional<std::string>(key)) return std::nullopt;
        return num(key, 0);
    }

    std::string str(const std::string& key, const std::string& fallback) {
        std::string v = fallback;
        if (tree_)
            if (auto node = tree_->get_optional<std::string>(key)) v = *node;
        s_.resolved[key] = v;
        return v;
    }

    void record(const std::string& key, double v) {
        std::ostringstream o;
        o.precision(17);
        o << v;
        s_.resolved[key] = o.str();
    }

private:
    const pt::ptree* tree_;
    Setup& s_;
};

void check_fraction(const std::string& key, double v, bool allow_one = false) {
    if (!(v >= 0) || v > 1 || (!allow_one && v == 1)) throw DomainError("config field " + key + ": must lie in [0,1)");
}

Setup build(const pt::ptree* tree) {
    Setup s;
    Reader rd(tree, s);
    auto& sm = s.cavity.crystal.sellmeier;
    sm.name = rd.str("sellmeier.name", "jundt-1997-congruent-extraordinary");
    const double a_def[6] = {5.35583, 0.100473, 0.20692, 100, 11.34927, 1.5334e-2};
    const double b_def[4] = {4.629e-7, 3.862e-8, -0.89e-8, 2.657e-5};
    for (int i = 0; i < 6; ++i) sm.a[i] = rd.num("sellmeier.a" + std::to_string(i + 1), a_def[i]);
    for (int i = 0; i < 4; ++i) sm.b[i] = rd.num("sellmeier.b" + std::to_string(i + 1), b_def[i]);
    sm.t_ref = rd.num("sellmeier.t_ref_c", 24.5);
    sm.t_shift = rd.num("sellmeier.t_shift_c", 570.82);
    sm.lambda_min_um = rd.num("sellmeier.lambda_min_um", 0.4);
    sm.lambda_max_um = rd.num("sellmeier.lambda_max_um", 5.0);
    sm.t_min_c = rd.num("sellmeier.t_min_c", 20);
    sm.t_max_c = rd.num("sellmeier.t_max_c", 250);
    if (!(sm.lambda_max_um > sm.lambda_min_um)) throw DomainError("config field sellmeier.lambda_max_um: window is empty");
    if (!(sm.t_max_c > sm.t_min_c)) throw DomainError("config field sellmeier.t_max_c: window is empty");

    auto& ex = s.cavity.crystal.expansion;
    ex.t0 = rd.num("sellmeier.expansion_t0_c", 25);
    ex.alpha = rd.num("sellmeier.expansion_alpha", 1.54e-5);
    ex.beta = rd.num("sellmeier.expansion_beta", 5.3e-9);

    auto& cr = s.cavity.crystal;
    cr.l = rd.num("crystal.length_mm", 19) * 1e-3;
    cr.Lambda = rd.num("crystal.period_um", 31.1) * 1e-6;
    cr.face_loss_pump = rd.num("crystal.face_loss_pump", 0.006);
    cr.face_loss_ir = rd.num("crystal.face_loss_ir", 0.004);
    cr.bulk_absorption_pump = rd.num("crystal.absorption_pump", 0.003);
    cr.fractional_period_phase = rd.num("crystal.fractional_period_phase_rad", 0);
    check_fraction("crystal.face_loss_pump", cr.face_loss_pump);
    check_fraction("crystal.face_loss_ir", cr.face_loss_ir);
    check_fraction("crystal.absorption_pump", cr.bulk_absorption_pump);
    if (!(cr.l > 0)) throw DomainError("config field crystal.length_mm: must be positive");
    if (!(cr.Lambda > 0)) throw DomainError("config field crystal.period_um: must be positive");
    s.temperature_c = rd.opt("crystal.temperature_c");

    auto& cv = s.cavity;
    cv.L_cav = rd.num("cavity.length_mm", 65) * 1e-3;
    cv.lambda0 = rd.num("cavity.pump_wavelength_um", 1.064) * 1e-6;
    auto mirror = [&](Band b, const std::string& name, double R, double T) {
        const double r = rd.num("cavity." + name + "_R", R), t = rd.num("cavity." + name + "_T", T);
        check_fraction("cavity." + name + "_R", r, true);
        check_fraction("cavity." + name + "_T", t, true);
        try {
            return MirrorSpec::make(b, r, t);
        } catch (const DomainError& e) {
            throw DomainError("config field cavity." + name + "_R/_T: " + e.what());
        }
    };
    cv.pump_in = mirror(Band::pump, "pump_in", 0.87, 0.13);
    cv.pump_end = mirror(Band::pump, "pump_end", 0.998, 0.002);
    cv.ir_in = mirror(Band::ir, "ir_in", 0.998, 0.002);
    cv.ir_end = mirror(Band::ir, "ir_end", 0.99, 0.01);

    s.min_threshold_W = rd.num("coupling.min_threshold_uw", 300) * 1e-6;
    if (auto d = rd.opt("coupling.d_eff")) {
        cr.d_eff = *d;
        s.calibrated = false;
    } else {
        cr.d_eff = calibrate_coupling(cv, s.min_threshold_W);
        rd.record("coupling.d_eff", cr.d_eff);
    }

    auto& f = s.filter;
    f.round_trip_length = rd.num("filter.round_trip_cm", 70) * 1e-2;
    f.mirror_R = {rd.num("filter.m1_R", 0.995), rd.num("filter.m2_R", 0.995), rd.num("filter.m3_R", 0.999)};
    // "derived" falls back to the mirror reflectivities
    const std::string mf = rd.str("filter.measured_finesse", "700");
    if (mf != "derived") {
        try {
            f.measured_finesse = std::stod(mf);
        } catch (const std::logic_error&) {
            throw DomainError("config field filter.measured_finesse: number or 'derived' expected");
        }
        if (!(*f.measured_finesse > 0)) throw DomainError("config field filter.measured_finesse: must be positive");
    }

    auto& ch = s.chain;
    ch.eta_qe = rd.num("detection.eta_qe", 0.94);
    ch.visibility = rd.num("detection.visibility", 0.97);
    ch.gamma = rd.num("detection.gamma", 0.0);
    ch.I_W = rd.num("detection.reflected_pump_mw", 0.45) * 1e-3;
    ch.I_LO_W = rd.num("detection.lo_mw", 1.2) * 1e-3;
    s.reference_measured = rd.num("detection.reference_measured", 0.70);
    s.reference_inferred = rd.num("detection.reference_inferred", 0.62);
    if (auto p = rd.opt("detection.eta_path")) {
        ch.eta_path = *p;
        s.eta_path_back_computed = false;
    } else {
        ch.eta_path = back_computed_path_efficiency(s.reference_measured, s.reference_inferred, ch.eta_qe, ch.visibility);
        rd.record("detection.eta_path", ch.eta_path);
    }
    try {
        ch.validate();
    } catch (const DomainError& e) {
        throw DomainError(std::string("config section detection: ") + e.what());
    }
    cv.crystal.T = s.temperature_c.value_or(cv.crystal.T);
    cv.validate();
    return s;
}

}  // namespace

Setup load_setup(const std::string& path) {
    pt::ptree tree;
    try {
        pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw DomainError(std::string("config: ") + e.what());
    }
    Setup s = build(&tree);
    if (!s.temperature_c) s.cavity.crystal.T = qpm_temperature(s);
    return s;
}

Setup setup_from_values(const std::map<std::string, std::string>& values) {
    pt::ptree tree;
    for (const auto& [k, v] : values) tree.put(k, v);
    Setup s = build(&tree);
    if (!s.temperature_c) s.cavity.crystal.T = qpm_temperature(s);
    return s;
}

Setup default_setup() {
    Setup s = build(nullptr);
    if (!s.temperature_c) s.cavity.crystal.T = qpm_temperature(s);
    return s;
}

double qpm_temperature(const Setup& s) {
    return degeneracy_temperature(s.cavity.crystal.Lambda, s.cavity.crystal, s.cavity.lambda0);
}

CavitySpec at_temperature(const Setup& s, double T) {
    CavitySpec c = s.cavity;
    c.crystal.T = T;
    return c;
}

}  // namespace opo
