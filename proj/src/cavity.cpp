#include "opo/cavity.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

namespace opo {

MirrorSpec MirrorSpec::make(Band band, double R, double T) {
    if (R < 0 || R > 1 || T < 0 || T > 1 || R + T > 1 + 1e-12)
        throw DomainError("mirror needs R, T in [0,1] with R + T <= 1");
    return {band, R, T, std::max(0.0, 1.0 - R - T)};
}

double LossLedger::total() const {
    double s = 0;
    for (const auto& it : items) s += it.loss;
    return s;
}

double LossLedger::amplitude() const {
    double p = 1;
    for (const auto& it : items) p *= 1 - it.loss;
    return std::sqrt(p);
}

LossLedger CavitySpec::ledger(Band band) const {
    LossLedger lg{band, {}};
    const auto& cr = crystal;
    if (band == Band::pump) {
        lg.items.push_back({"input coupler transmission", pump_in.T});
        if (pump_in.A > 0) lg.items.push_back({"input coupler excess", pump_in.A});
        lg.items.push_back({"end mirror", 1 - pump_end.R});
        for (int i = 0; i < 4; ++i) lg.items.push_back({"crystal face " + std::to_string(i + 1), cr.face_loss_pump});
        for (int i = 0; i < 2; ++i)
            lg.items.push_back({"crystal absorption pass " + std::to_string(i + 1), cr.bulk_absorption_pump});
    } else {
        lg.items.push_back({"input mirror", 1 - ir_in.R});
        lg.items.push_back({"end mirror", 1 - ir_end.R});
        for (int i = 0; i < 4; ++i) lg.items.push_back({"crystal face " + std::to_string(i + 1), cr.face_loss_ir});
    }
    return lg;
}

double CavitySpec::t0() const { return std::sqrt(pump_in.T); }
double CavitySpec::r_in() const { return std::sqrt(pump_in.R); }
double CavitySpec::r0() const { return ledger(Band::pump).amplitude(); }
double CavitySpec::r() const { return ledger(Band::ir).amplitude(); }

void CavitySpec::validate() const {
    crystal.validate();
    if (!(L_cav > crystal.l)) throw DomainError("cavity must be longer than the crystal");
    const double t = t0(), a = r0();
    const double excess = 1 - a * a / pump_in.R;
    if (t * t + a * a * (1 - excess) > 1 + 1e-12) throw DomainError("pump coupler violates t0^2 + r0^2 <= 1");
    if (!(r() < 1)) throw DomainError("signal/idler round trip must have loss");
    for (auto b : {Band::pump, Band::ir})
        if (ledger(b).total() >= 1) throw DomainError("round-trip loss >= 1, not a resonator");
}

double wrap_phase(double x) {
    double y = std::remainder(x, 2 * pi);
    if (y <= -pi) y += 2 * pi;
    return y;
}

double pump_phase_offset(const CavitySpec& cav) {
    const double q = cav.crystal.l / cav.crystal.Lambda;
    return 2 * cav.crystal.fractional_period_phase - 4 * pi * (q - std::floor(q));
}

PhaseValue round_trip_phase(double w, Band band, const CavitySpec& cav, double T) {
    cav.crystal.sellmeier.check_window(wavelength_um(w), T);
    double u = propagation_phase<double>(w, T, cav);
    if (band == Band::pump) u += pump_phase_offset(cav);
    return {wrap_phase(u), u};
}

double group_delay(double w, const CavitySpec& cav, double T) {
    const double l = cav.crystal.length_at(T);
    const double ng = group_index(wavelength_um(w), T, cav.crystal.sellmeier);
    return 2 / c_light * ((cav.L_cav - l) + ng * l);
}

double round_trip_time(const CavitySpec& cav, double T) { return group_delay(cav.w0() / 2, cav, T); }

FinesseResult finesse(Band band, const CavitySpec& cav) {
    auto lg = cav.ledger(band);
    const double L = lg.total();
    if (!(L > 0) || L >= 1) throw DomainError("round-trip loss must lie in (0,1)");
    return {2 * pi / L, lg};
}

double cavity_bandwidth(Band band, const CavitySpec& cav, double T) {
    const double amp = band == Band::pump ? cav.r0() : cav.r();
    return -std::log(amp) / round_trip_time(cav, T);
}

double mode_signal_frequency(int p, double L, double T, const CavitySpec& cav, double guess) {
    CavitySpec c = cav;
    c.L_cav = L;
    using ld = long double;
    const ld w0 = c.w0();
    if (p == 0) return double(w0 / 2);
    ld w1 = guess > 0 ? guess : w0 / 2 + p * pi / round_trip_time(c, T);
    const auto& m = c.crystal.sellmeier;
    for (int it = 0; it < 50; ++it) {
        m.check_window(wavelength_um(double(w1)), T);
        m.check_window(wavelength_um(double(w0 - w1)), T);
        const ld G = propagation_phase<ld>(w1, T, c) - propagation_phase<ld>(w0 - w1, T, c) - ld(2 * pi) * p;
        const ld dG = group_delay(double(w1), c, T) + group_delay(double(w0 - w1), c, T);
        const ld step = G / dG;
        w1 -= step;
        if (std::abs(double(G)) < 1e-13 || std::abs(double(step)) < 1e-18 * double(w1)) break;
    }
    return double(w1);
}

std::vector<double> double_resonance_lengths(double T, int p, const CavitySpec& cav, double L_lo, double L_hi) {
    if (!(L_hi > L_lo)) throw ArgumentError("empty length window");
    double guess = 0;
    auto common = [&](double L) {
        CavitySpec c = cav;
        c.L_cav = L;
        guess = mode_signal_frequency(p, L, T, c, guess);
        return propagation_phase<long double>(guess, T, c);
    };
    const long double a = common(L_lo), b = common(L_hi);
    std::vector<double> out;
    for (long m = long(std::ceil(double(a / (2 * pi)))); m <= long(std::floor(double(b / (2 * pi)))); ++m) {
        const long double target = 2 * pi * (long double)m;
        auto g = [&](double L) { return double(common(L) - target); };
        // phase is close to linear in L, so a tight bracket comes from the slope
        const double slope = double(b - a) / (L_hi - L_lo);
        double x = L_lo + double(target - a) / slope;
        double lo = std::max(L_lo, x - 1e-9), hi = std::min(L_hi, x + 1e-9);
        double glo = g(lo), ghi = g(hi);
        if (glo * ghi > 0) {
            lo = L_lo;
            hi = L_hi;
            glo = g(lo);
            ghi = g(hi);
        }
        if (glo == 0) { out.push_back(lo); continue; }
        if (ghi == 0) { out.push_back(hi); continue; }
        boost::uintmax_t iters = 100;
        auto tol = [](double u, double v) { return std::abs(u - v) < 1e-22; };
        auto [r1, r2] = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, iters);
        out.push_back(std::abs(g(r1)) < std::abs(g(r2)) ? r1 : r2);
    }
    return out;
}

double FilterCavitySpec::derived_finesse() const {
    double loss = 0;
    for (double R : mirror_R) loss += 1 - R;
    if (!(loss > 0)) throw DomainError("filter cavity without loss has no finite finesse");
    return 2 * pi / loss;
}

double FilterCavitySpec::finesse() const { return measured_finesse ? *measured_finesse : derived_finesse(); }

double filter_transfer(double Omega_hz, const FilterCavitySpec& spec) {
    const double x = Omega_hz / spec.bandwidth_hz();
    return 1 / (1 + x * x);
}

double filter_noise_transmission(double Omega_hz, double S_in, const FilterCavitySpec& spec) {
    if (!spec.locked) throw DomainError("filter cavity must be locked on resonance");
    return 1 + (S_in - 1) * filter_transfer(Omega_hz, spec);
}

}  // namespace opo
