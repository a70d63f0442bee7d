#include "opo/dispersion.hpp"

#include <boost/math/tools/roots.hpp>
#include <sstream>

namespace opo {

void SellmeierModel::check_window(double lam_um, double T) const {
    std::ostringstream msg;
    if (!(lam_um >= lambda_min_um))
        msg << "wavelength " << lam_um << " um below lambda_min_um=" << lambda_min_um;
    else if (!(lam_um <= lambda_max_um))
        msg << "wavelength " << lam_um << " um above lambda_max_um=" << lambda_max_um;
    else if (!(T >= t_min_c))
        msg << "temperature " << T << " C below t_min_c=" << t_min_c;
    else if (!(T <= t_max_c))
        msg << "temperature " << T << " C above t_max_c=" << t_max_c;
    else
        return;
    throw DomainError(msg.str());
}

void CrystalSpec::validate() const {
    if (!(l > 0) || !(Lambda > 0)) throw DomainError("crystal length and period must be positive");
    if (l / Lambda < 10) throw DomainError("crystal must hold many poling periods");
    for (double x : {face_loss_pump, face_loss_ir, bulk_absorption_pump})
        if (x < 0 || x >= 1) throw DomainError("crystal losses must lie in [0,1)");
}

FrequencyPair::FrequencyPair(double w1, double w2, double w0) : w0_(w0), w1_(w1), w2_(w2) {
    if (!(w1 > 0) || !(w2 > 0) || std::abs(w1 + w2 - w0) > 1e-12 * w0)
        throw DomainError("frequency pair violates w0 = w1 + w2");
}

double refractive_index(double lam_um, double T, const SellmeierModel& model) {
    model.check_window(lam_um, T);
    return sellmeier_index(model, lam_um, T);
}

double group_index(double lam_um, double T, const SellmeierModel& model) {
    model.check_window(lam_um, T);
    const double h = 1e-4 * lam_um;
    const double dn = (sellmeier_index(model, lam_um + h, T) - sellmeier_index(model, lam_um - h, T)) / (2 * h);
    return sellmeier_index(model, lam_um, T) - lam_um * dn;
}

double wavevector(double w, double T, const SellmeierModel& model) {
    if (!(w > 0)) throw DomainError("angular frequency must be positive");
    return refractive_index(wavelength_um(w), T, model) * w / c_light;
}

double bulk_mismatch(double w1, double w2, double T, const CrystalSpec& crystal) {
    const FrequencyPair fp(w1, w2, w1 + w2);
    const auto& m = crystal.sellmeier;
    return wavevector(fp.w0(), T, m) - wavevector(fp.w1(), T, m) - wavevector(fp.w2(), T, m);
}

double qpm_mismatch(double w1, double w2, double T, const CrystalSpec& crystal) {
    return bulk_mismatch(w1, w2, T, crystal) - 2 * pi / crystal.period_at(T);
}

CouplingResult qpm_coupling(double w1, double w2, double T, const CrystalSpec& crystal) {
    CouplingResult c;
    const double l = crystal.length_at(T);
    c.delta_k = bulk_mismatch(w1, w2, T, crystal);
    c.delta_kappa = c.delta_k - 2 * pi / crystal.period_at(T);
    const double xb = c.delta_k * l / 2, xq = c.delta_kappa * l / 2;
    c.chi_bulk = crystal.d_eff * sinc(xb) * std::polar(1.0, -xb);
    c.chi = crystal.d_eff * (2 / pi) * sinc(xq) * std::polar(1.0, -xq);
    return c;
}

CouplingResult qpm_coupling(double w1, double w2, const CrystalSpec& crystal) {
    return qpm_coupling(w1, w2, crystal.T, crystal);
}

std::complex<double> round_trip_coupling(const CouplingResult& c, double T, const CrystalSpec& crystal) {
    const double phase = c.delta_kappa * crystal.length_at(T) + crystal.fractional_period_phase;
    return c.chi * (1.0 + std::polar(1.0, phase)) / 2.0;
}

double double_pass_envelope(double x, double psi) {
    return std::abs(sinc(x) * std::cos(x + psi / 2));
}

double degeneracy_temperature(double Lambda, const CrystalSpec& crystal, double lambda0) {
    CrystalSpec cr = crystal;
    cr.Lambda = Lambda;
    const double w0 = angular_frequency(lambda0);
    const auto& m = cr.sellmeier;
    auto f = [&](double T) { return qpm_mismatch(w0 / 2, w0 / 2, T, cr); };

    // coarse bracket over the validity window, then TOMS 748
    const int n = 230;
    double ta = m.t_min_c, fa = f(ta);
    for (int i = 1; i <= n; ++i) {
        const double tb = m.t_min_c + (m.t_max_c - m.t_min_c) * i / n;
        const double fb = f(tb);
        if (fa == 0) return ta;
        if (fa * fb < 0) {
            boost::uintmax_t iters = 200;
            auto tol = [](double a, double b) { return std::abs(a - b) < 1e-13; };
            auto [lo, hi] = boost::math::tools::toms748_solve(f, ta, tb, fa, fb, tol, iters);
            const double fl = f(lo), fh = f(hi);
            return std::abs(fl) <= std::abs(fh) ? lo : hi;
        }
        ta = tb;
        fa = fb;
    }
    std::ostringstream msg;
    msg << "no quasi-phase-matching temperature in [" << m.t_min_c << ", " << m.t_max_c
        << "] C for period " << Lambda * 1e6 << " um";
    throw NotFoundError(msg.str());
}

}  // namespace opo
