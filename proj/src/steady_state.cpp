#include "opo/steady_state.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <sstream>

namespace opo {

PumpDrive PumpDrive::from_power(double P_in, double w0) {
    if (P_in < 0) throw DomainError("pump power must be >= 0");
    return {cd(std::sqrt(P_in / (hbar * w0)), 0.0), P_in, w0};
}

const char* branch_name(Branch b) {
    switch (b) {
        case Branch::trivial: return "trivial";
        case Branch::lower: return "lower";
        case Branch::upper: return "upper";
    }
    return "?";
}

RoundTrip RoundTrip::from(const CavitySpec& cav, const DetuningSet& d, cd chi, cd E_in) {
    const double r = cav.r();
    return {cav.t0(), cav.r0(), r, r, d.phi0.wrapped, d.phi1.wrapped, d.phi2.wrapped, chi, E_in};
}

MapLinearization linearize_map(const RoundTrip& m, const Eigen::Vector3cd& E) {
    MapLinearization L;
    const cd u0 = m.u0(), u1 = m.u1(), u2 = m.u2(), chi = m.chi;
    L.a(0, 0) = u0;
    L.a(0, 1) = -u0 * std::conj(chi) * E(2);
    L.a(0, 2) = -u0 * std::conj(chi) * E(1);
    L.a(1, 1) = u1;
    L.a(1, 0) = u1 * chi * std::conj(E(2));
    L.b(1, 2) = u1 * chi * E(0);
    L.a(2, 2) = u2;
    L.a(2, 0) = u2 * chi * std::conj(E(1));
    L.b(2, 1) = u2 * chi * E(0);
    return L;
}

Eigen::Matrix<double, 6, 6> map_jacobian(const RoundTrip& m, const Eigen::Vector3cd& E) {
    const auto L = linearize_map(m, E);
    Eigen::Matrix<double, 6, 6> J;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) J.block<2, 2>(2 * i, 2 * j) = real_block<double>(L.a(i, j), L.b(i, j));
    return J;
}

double calibrate_coupling(const CavitySpec& cav, double P_min) {
    if (!(P_min > 0)) throw DomainError("calibration threshold must be positive");
    const double r0 = cav.r0(), r = cav.r(), t0 = cav.t0();
    const double chi0 = std::sqrt(std::pow((1 - r0) * (1 - r), 2) * hbar * cav.w0() / (t0 * t0 * r * r * P_min));
    return chi0 * pi / 2;
}

double clamp_pump(double phi1, double phi2, double r, cd chi) {
    if (std::abs(chi) == 0) throw DomainError("zero coupling, no oscillation possible");
    if (!(r > 0 && r < 1)) throw DomainError("r must lie in (0,1)");
    if (std::abs(wrap_phase(phi1 - phi2)) > 1e-9) throw DomainError("signal and idler phases violate phi1 = phi2 + 2 p pi");
    const double a = std::abs(1.0 - std::polar(r, phi1)), b = std::abs(1.0 - std::polar(r, -phi2));
    return std::sqrt(a * b) / (r * std::abs(chi));
}

double threshold_from_phases(double phi0, double phi1, cd chi, const CavitySpec& cav) {
    if (std::abs(chi) == 0) throw DomainError("zero coupling: threshold is infinite");
    const double r0 = cav.r0(), r = cav.r(), t0 = cav.t0();
    const double a = std::norm(1.0 - std::polar(r0, phi0)), b = std::norm(1.0 - std::polar(r, phi1));
    return hbar * cav.w0() * a * b / (t0 * t0 * r * r * std::norm(chi));
}

double threshold(const ModeSolution& mode, const CavitySpec& cav) {
    const double c = clamp_pump(mode.detunings.phi1.wrapped, mode.detunings.phi2.wrapped, cav.r(), mode.chi);
    const double free_pump = std::abs(cav.t0() / (1.0 - cav.r0() * std::polar(1.0, mode.detunings.phi0.wrapped)));
    // free intracavity pump t0 E_in / (1 - u0) reaches the clamp
    const double Ein = c / free_pump;
    return hbar * cav.w0() * Ein * Ein;
}

double minimum_threshold(double T, const CavitySpec& cav) {
    const double w0 = cav.w0();
    const auto& m = cav.crystal.sellmeier;
    const double w_hi = std::min(w0 - angular_frequency(m.lambda_max_um * 1e-6), angular_frequency(m.lambda_min_um * 1e-6));
    auto neg_chi = [&](double w1) {
        return -std::abs(round_trip_coupling(qpm_coupling(w1, w0 - w1, T, cav.crystal), T, cav.crystal));
    };
    const double dw = 2 * pi * 2e9;
    double best_w = w0 / 2, best = neg_chi(best_w);
    for (double w1 = w0 / 2 + dw; w1 < w_hi; w1 += dw) {
        const double v = neg_chi(w1);
        if (v < best) { best = v; best_w = w1; }
    }
    const double lo = std::max(w0 / 2, best_w - dw), hi = std::min(w_hi, best_w + dw);
    auto res = boost::math::tools::brent_find_minima(neg_chi, lo, hi, 40);
    if (res.second < best) best = res.second;
    return threshold_from_phases(0, 0, cd(-best, 0), cav);
}

static double best_envelope(double psi) {
    auto f = [psi](double x) { return -double_pass_envelope(x, psi); };
    double bx = 0, bv = f(0);
    for (int i = -2000; i <= 2000; ++i) {
        const double x = 2 * pi * i / 2000.0;
        const double v = f(x);
        if (v < bv) { bv = v; bx = x; }
    }
    auto res = boost::math::tools::brent_find_minima(f, bx - 2 * pi / 2000, bx + 2 * pi / 2000, 50);
    return -std::min(bv, res.second);
}

double threshold_penalty(double psi) {
    const double e = best_envelope(psi), e0 = best_envelope(0);
    return (e0 * e0) / (e * e);
}

double max_threshold_penalty(double* psi_at_max) {
    double bp = 0, bv = 0;
    for (int i = 0; i < 360; ++i) {
        const double psi = 2 * pi * i / 360;
        const double v = threshold_penalty(psi);
        if (v > bv) { bv = v; bp = psi; }
    }
    auto res = boost::math::tools::brent_find_minima([](double s) { return -threshold_penalty(s); },
                                                     bp - 2 * pi / 360, bp + 2 * pi / 360, 40);
    if (-res.second > bv) { bv = -res.second; bp = res.first; }
    if (psi_at_max) *psi_at_max = bp;
    return bv;
}

std::vector<SteadyState> solve_steady(const PumpDrive& drive, const DetuningSet& d, const ModeSolution& mode,
                                      const CavitySpec& cav) {
    const RoundTrip m = RoundTrip::from(cav, d, mode.chi, drive.E_in);
    const cd u0 = m.u0(), u1 = m.u1();
    const cd A = 1.0 - u0;
    std::vector<SteadyState> out;

    SteadyState triv{m.t0 * drive.E_in / A, 0, 0, mode, drive, Branch::trivial, false};
    out.push_back(triv);

    if (std::abs(drive.E_in) > 0 && std::abs(mode.chi) > 0 && std::abs(wrap_phase(m.phi1 - m.phi2)) < 1e-9) {
        const double Ec = clamp_pump(m.phi1, m.phi2, m.r1, mode.chi);
        const cd B = u0 * std::norm(mode.chi) * u1 / (1.0 - u1);
        const double K = std::norm(m.t0 * drive.E_in) / (Ec * Ec);
        // |A + B I|^2 = K
        const double qa = std::norm(B), qb = 2 * (A * std::conj(B)).real(), qc = std::norm(A) - K;
        const double disc = qb * qb - 4 * qa * qc;
        std::vector<double> roots;
        if (disc >= 0) {
            const double s = std::sqrt(disc);
            const double q = -0.5 * (qb + (qb >= 0 ? s : -s));
            for (double I : {q / qa, q != 0 ? qc / q : -1.0})
                if (I > 0 && std::isfinite(I)) roots.push_back(I);
            std::sort(roots.begin(), roots.end());
            if (roots.size() == 2 && roots[1] - roots[0] <= 1e-14 * roots[1]) roots.pop_back();
        }
        for (std::size_t k = 0; k < roots.size(); ++k) {
            const double I = roots[k];
            SteadyState s;
            s.E0 = m.t0 * drive.E_in / (A + B * I);
            s.E2 = cd(std::sqrt(I), 0);
            s.E1 = u1 * mode.chi * s.E0 * std::conj(s.E2) / (1.0 - u1);
            s.mode = mode;
            s.drive = drive;
            s.branch = (roots.size() == 2 && k == 0) ? Branch::lower : Branch::upper;
            out.push_back(s);
        }
    }

    for (auto& s : out) {
        const Eigen::Vector3cd E = fields(s);
        Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> es(map_jacobian(m, E), false);
        std::vector<cd> ev(es.eigenvalues().data(), es.eigenvalues().data() + 6);
        if (s.branch != Branch::trivial) {
            // drop the neutral signal-idler phase mode
            auto it = std::min_element(ev.begin(), ev.end(),
                                       [](cd a, cd b) { return std::abs(a - 1.0) < std::abs(b - 1.0); });
            ev.erase(it);
        }
        double rho = 0;
        for (cd v : ev) rho = std::max(rho, std::abs(v));
        s.stable = rho < 1 - 1e-12;
    }
    return out;
}

Eigen::Vector3cd fields(const SteadyState& s) { return Eigen::Vector3cd(s.E0, s.E1, s.E2); }

RoundTrip round_trip(const SteadyState& s, const CavitySpec& cav) {
    return RoundTrip::from(cav, s.mode.detunings, s.mode.chi, s.drive.E_in);
}

cd reflected_pump(const SteadyState& s, const CavitySpec& cav) {
    const RoundTrip m = round_trip(s, cav);
    const double rin = cav.r_in();
    const cd X = (m.r0 / rin) * (s.E0 - std::conj(m.chi) * s.E1 * s.E2) * std::polar(1.0, m.phi0);
    return m.t0 * X - rin * s.drive.E_in;
}

double reflected_pump_power(const SteadyState& s, const CavitySpec& cav) {
    return hbar * s.drive.w0 * std::norm(reflected_pump(s, cav));
}

PhotonBalance photon_balance(const SteadyState& s, const CavitySpec& cav) {
    const RoundTrip m = round_trip(s, cav);
    PhotonBalance b;
    b.pump_converted = 2 * (m.chi * s.E0 * std::conj(s.E1) * std::conj(s.E2)).real();
    b.signal_out = 2 * std::norm(s.E1) * (std::cos(m.phi1) / m.r1 - 1);
    b.idler_out = 2 * std::norm(s.E2) * (std::cos(m.phi2) / m.r2 - 1);
    return b;
}

ModeSolution make_mode(int p, double L, double T, const CavitySpec& cav, double guess) {
    if (p < 0) throw DomainError("mode index counts from the degenerate mode, p >= 0 (w1 >= w2)");
    CavitySpec c = cav;
    c.L_cav = L;
    ModeSolution ms;
    ms.p = p;
    const double w0 = c.w0();
    ms.w1 = mode_signal_frequency(p, L, T, c, guess);
    ms.w2 = w0 - ms.w1;
    const FrequencyPair fp(ms.w1, ms.w2, w0);
    ms.dnu_THz = (ms.w1 - ms.w2) / (2 * pi) / 1e12;
    ms.detunings.phi0 = round_trip_phase(w0, Band::pump, c, T);
    ms.detunings.phi1 = round_trip_phase(ms.w1, Band::ir, c, T);
    ms.detunings.phi2 = round_trip_phase(ms.w2, Band::ir, c, T);
    const long double g = propagation_phase<long double>(ms.w1, T, c) - propagation_phase<long double>(ms.w2, T, c);
    ms.residual = std::abs(double(g - (long double)(2 * pi) * p));
    ms.coupling = qpm_coupling(ms.w1, ms.w2, T, c.crystal);
    ms.chi = round_trip_coupling(ms.coupling, T, c.crystal);
    ms.P_th = std::abs(ms.chi) > 0 ? threshold(ms, c) : INFINITY;
    return ms;
}

static bool mode_less(double ta, int pa, double wa, double tb, int pb, double wb) {
    if (std::isinf(ta) || std::isinf(tb) || std::abs(ta - tb) > 1e-9 * std::max(ta, tb)) return ta < tb;
    if (std::abs(pa) != std::abs(pb)) return std::abs(pa) < std::abs(pb);
    return wa < wb;
}

std::vector<ModeSolution> mode_catalog(double L, double T, int p_lo, int p_hi, const CavitySpec& cav) {
    if (p_hi < p_lo) throw ArgumentError("empty mode range");
    std::vector<ModeSolution> out;
    for (int p = std::max(0, p_lo); p <= p_hi; ++p) {
        try {
            out.push_back(make_mode(p, L, T, cav));
        } catch (const DomainError&) {
            // no root inside the dispersion window
        }
    }
    std::sort(out.begin(), out.end(), [](const ModeSolution& a, const ModeSolution& b) {
        return mode_less(a.P_th, a.p, a.w1, b.P_th, b.p, b.w1);
    });
    return out;
}

std::vector<int> candidate_modes(double T, double P_in, const CavitySpec& cav) {
    const double w0 = cav.w0(), tau = round_trip_time(cav, T);
    const auto& m = cav.crystal.sellmeier;
    const double w_hi = std::min(w0 - angular_frequency(m.lambda_max_um * 1e-6), angular_frequency(m.lambda_min_um * 1e-6));
    std::vector<int> out;
    for (int p = 0;; ++p) {
        const double w1 = w0 / 2 + p * pi / tau;
        if (w1 >= w_hi) break;
        const cd chi = round_trip_coupling(qpm_coupling(w1, w0 - w1, T, cav.crystal), T, cav.crystal);
        if (std::abs(chi) == 0) continue;
        if (threshold_from_phases(0, 0, chi, cav) < 1.02 * P_in) out.push_back(p);
    }
    return out;
}

double degenerate_resonance_length(double T, const CavitySpec& cav) {
    const auto Ls = double_resonance_lengths(T, 0, cav, cav.L_cav - cav.lambda0 / 2, cav.L_cav + cav.lambda0 / 2);
    if (Ls.empty()) throw NotFoundError("no degenerate double resonance near the cavity length");
    return *std::min_element(Ls.begin(), Ls.end(), [&](double a, double b) {
        return std::abs(a - cav.L_cav) < std::abs(b - cav.L_cav);
    });
}

namespace {

// signal phase of each candidate mode, refreshed every few nm and carried linearly in between
class ModeTracker {
public:
    ModeTracker(std::vector<int> ps, double T, const CavitySpec& cav) : T_(T), cav_(cav), ps_(std::move(ps)) {
        w1_.assign(ps_.size(), 0.0);
        phi_ref_.resize(ps_.size());
        slope_.resize(ps_.size());
        inv_chi2_.resize(ps_.size());
        chi_.resize(ps_.size());
    }

    void at(double L) {
        if (have_ref_ && std::abs(L - L_ref_) <= refresh_) return;
        L_ref_ = L;
        have_ref_ = true;
        CavitySpec c = cav_;
        c.L_cav = L;
        const double w0 = c.w0();
        for (std::size_t k = 0; k < ps_.size(); ++k) {
            const double w1 = mode_signal_frequency(ps_[k], L, T_, c, w1_[k]);
            w1_[k] = w1;
            const double w2 = w0 - w1;
            phi_ref_[k] = propagation_phase<long double>(w1, T_, c);
            // implicit derivative of the phase condition with respect to L
            const double g1 = group_delay(w1, c, T_), g2 = group_delay(w2, c, T_);
            const double dw1 = -(2 * (w1 - w2) / c_light) / (g1 + g2);
            slope_[k] = 2 * w1 / c_light + g1 * dw1;
            chi_[k] = round_trip_coupling(qpm_coupling(w1, w2, T_, c.crystal), T_, c.crystal);
            inv_chi2_[k] = 1 / std::norm(chi_[k]);
        }
    }

    double phi1(std::size_t k, double L) const {
        return wrap_phase(double(std::fmod(phi_ref_[k], (long double)(2 * pi))) + slope_[k] * (L - L_ref_));
    }

    ModeSolution mode(std::size_t k, double L) const {
        CavitySpec c = cav_;
        c.L_cav = L;
        ModeSolution ms;
        ms.p = ps_[k];
        const double w0 = c.w0();
        const double dw = -(2 * (w1_[k] - (w0 - w1_[k])) / c_light) /
                          (group_delay(w1_[k], c, T_) + group_delay(w0 - w1_[k], c, T_));
        ms.w1 = w1_[k] + dw * (L - L_ref_);
        ms.w2 = w0 - ms.w1;
        ms.dnu_THz = (ms.w1 - ms.w2) / (2 * pi) / 1e12;
        const double ph = phi1(k, L);
        const double u = double(phi_ref_[k]) + slope_[k] * (L - L_ref_);
        ms.detunings.phi0 = round_trip_phase(w0, Band::pump, c, T_);
        ms.detunings.phi1 = {ph, u};
        ms.detunings.phi2 = {ph, u - 2 * pi * ms.p};
        ms.coupling = qpm_coupling(w1_[k], w0 - w1_[k], T_, c.crystal);
        ms.chi = chi_[k];
        ms.P_th = threshold(ms, c);
        return ms;
    }

    std::size_t size() const { return ps_.size(); }
    int p(std::size_t k) const { return ps_[k]; }
    double w1(std::size_t k) const { return w1_[k]; }
    double inv_chi2(std::size_t k) const { return inv_chi2_[k]; }
    std::size_t index_of(int p) const {
        auto it = std::lower_bound(ps_.begin(), ps_.end(), p);
        return std::size_t(it - ps_.begin());
    }

private:
    double T_;
    CavitySpec cav_;
    std::vector<int> ps_;
    std::vector<double> w1_, slope_, inv_chi2_;
    std::vector<long double> phi_ref_;
    std::vector<cd> chi_;
    double L_ref_ = 0, refresh_ = 5e-9;
    bool have_ref_ = false;
};

}  // namespace

ScanTrace scan_cavity(const ScanWindow& w, double T, double P_in, Policy policy, const CavitySpec& cav) {
    if (!(w.step > 0)) throw ArgumentError("scan step must be positive");
    if (!(w.hi > w.lo)) throw ArgumentError("scan window is empty");
    const std::size_t n = std::size_t(std::floor((w.hi - w.lo) / w.step + 1e-9)) + 1;

    ScanTrace tr;
    tr.T = T;
    tr.P_in = P_in;
    tr.policy = policy;
    tr.samples.resize(n);

    ModeTracker trk(candidate_modes(T, P_in, cav), T, cav);
    const double r0 = cav.r0(), r = cav.r(), t0 = cav.t0();
    const double P0 = hbar * cav.w0() / (t0 * t0 * r * r);
    const PumpDrive drive = PumpDrive::from_power(P_in, cav.w0());

    int cur = -1, last_osc = -1;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = w.reverse ? n - 1 - i : i;
        const double off = w.lo + w.step * double(idx);
        const double L = w.L_ref + off;
        ScanSample& smp = tr.samples[idx];
        smp.L_offset = off;

        std::optional<SteadyState> chosen;
        if (trk.size() > 0) {
            trk.at(L);
            CavitySpec c = cav;
            c.L_cav = L;
            const double phi0 = round_trip_phase(c.w0(), Band::pump, c, T).wrapped;
            const double a0 = std::norm(1.0 - std::polar(r0, phi0));

            auto upper_branch = [&](std::size_t k) -> std::optional<SteadyState> {
                const ModeSolution ms = trk.mode(k, L);
                auto br = solve_steady(drive, ms.detunings, ms, c);
                if (br.size() < 2) return std::nullopt;
                return br.back();
            };

            if (policy == Policy::sticky && cur >= 0) chosen = upper_branch(trk.index_of(cur));

            if (!chosen) {
                std::size_t best = 0;
                double bt = INFINITY;
                for (std::size_t k = 0; k < trk.size(); ++k) {
                    const double t = P0 * a0 * std::norm(1.0 - std::polar(r, trk.phi1(k, L))) * trk.inv_chi2(k);
                    if (mode_less(t, trk.p(k), trk.w1(k), bt, best < trk.size() ? trk.p(best) : 0, trk.w1(best)))
                        bt = t, best = k;
                }
                if (bt < P_in) chosen = upper_branch(best);
            }
        }

        if (chosen) {
            const SteadyState& s = *chosen;
            smp.p = s.mode.p;
            smp.dnu_THz = s.mode.dnu_THz;
            smp.signal_intensity = std::norm(s.E1);
            smp.reflected_pump_W = reflected_pump_power(s, cav);
            smp.hop = (last_osc >= 0 && last_osc != smp.p) ? smp.p - last_osc : 0;
            smp.state = s;
            cur = last_osc = smp.p;
        } else {
            CavitySpec c = cav;
            c.L_cav = L;
            ModeSolution none;
            none.detunings.phi0 = round_trip_phase(c.w0(), Band::pump, c, T);
            SteadyState s{c.t0() * drive.E_in / (1.0 - c.r0() * std::polar(1.0, none.detunings.phi0.wrapped)), 0, 0,
                          none, drive, Branch::trivial, true};
            smp.reflected_pump_W = reflected_pump_power(s, c);
            cur = last_osc = -1;
        }
    }
    return tr;
}

std::vector<Plateau> plateaus(const ScanTrace& tr) {
    std::vector<Plateau> out;
    const auto& s = tr.samples;
    for (std::size_t i = 0; i < s.size();) {
        std::size_t j = i;
        while (j < s.size() && s[j].p == s[i].p) ++j;
        if (s[i].p >= 0) out.push_back({s[i].p, i, j - i});
        i = j;
    }
    return out;
}

}  // namespace opo
