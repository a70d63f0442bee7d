#pragma once
#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "opo/errors.hpp"

namespace opo {

inline constexpr double c_light = 299792458.0;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double pi = 3.14159265358979323846;

// n_e^2 = a1 + b1 f + (a2 + b2 f)/(lam^2 - (a3 + b3 f)^2) + (a4 + b4 f)/(lam^2 - a5^2) - a6 lam^2
// f = (T - t_ref)(T + t_shift), lam in um
struct SellmeierModel {
    std::string name;
    std::array<double, 6> a{};
    std::array<double, 4> b{};
    double t_ref = 24.5;
    double t_shift = 570.82;
    double lambda_min_um = 0.4, lambda_max_um = 5.0;
    double t_min_c = 20.0, t_max_c = 250.0;

    void check_window(double lam_um, double T) const;
};

// s(T) = 1 + alpha (T - t0) + beta (T - t0)^2, applied to crystal length and period
struct ThermalExpansion {
    double t0 = 25.0;
    double alpha = 0.0;
    double beta = 0.0;
    double scale(double T) const {
        const double d = T - t0;
        return 1.0 + alpha * d + beta * d * d;
    }
};

struct CrystalSpec {
    double l = 19e-3;          // m, at expansion reference temperature
    double Lambda = 31.1e-6;   // m
    double d_eff = 1.0;        // coupling scale, photon-flux units (see calibrate_coupling)
    SellmeierModel sellmeier;
    ThermalExpansion expansion;
    double T = 25.0;           // C
    double face_loss_pump = 0.0;
    double face_loss_ir = 0.0;
    double bulk_absorption_pump = 0.0;
    double fractional_period_phase = 0.0;

    double length_at(double T_c) const { return l * expansion.scale(T_c); }
    double period_at(double T_c) const { return Lambda * expansion.scale(T_c); }
    void validate() const;
};

// omega0 = omega1 + omega2 is checked on construction
class FrequencyPair {
public:
    FrequencyPair(double w1, double w2, double w0);
    static FrequencyPair split(double w0, double w1) { return {w1, w0 - w1, w0}; }
    double w0() const { return w0_; }
    double w1() const { return w1_; }
    double w2() const { return w2_; }

private:
    double w0_, w1_, w2_;
};

struct CouplingResult {
    double delta_k = 0.0;       // k0 - k1 - k2
    double delta_kappa = 0.0;   // delta_k - 2 pi / Lambda
    std::complex<double> chi_bulk;
    std::complex<double> chi;   // QPM, single pass
};

template <typename Scalar>
Scalar sellmeier_index(const SellmeierModel& m, Scalar lam_um, Scalar T) {
    using std::sqrt;
    const Scalar f = (T - m.t_ref) * (T + m.t_shift);
    const Scalar l2 = lam_um * lam_um;
    const Scalar g = m.a[2] + m.b[2] * f;
    const Scalar n2 = m.a[0] + m.b[0] * f + (m.a[1] + m.b[1] * f) / (l2 - g * g) +
                      (m.a[3] + m.b[3] * f) / (l2 - m.a[4] * m.a[4]) - m.a[5] * l2;
    return sqrt(n2);
}

template <typename Scalar>
Scalar sinc(Scalar x) {
    using std::abs;
    using std::sin;
    if (abs(x) < Scalar(1e-4)) {
        const Scalar x2 = x * x;
        return Scalar(1) - x2 / Scalar(6) + x2 * x2 / Scalar(120);
    }
    return sin(x) / x;
}

double refractive_index(double lam_um, double T, const SellmeierModel& model);
double group_index(double lam_um, double T, const SellmeierModel& model);
double wavevector(double w, double T, const SellmeierModel& model);

double qpm_mismatch(double w1, double w2, double T, const CrystalSpec& crystal);
double bulk_mismatch(double w1, double w2, double T, const CrystalSpec& crystal);

CouplingResult qpm_coupling(double w1, double w2, const CrystalSpec& crystal);
CouplingResult qpm_coupling(double w1, double w2, double T, const CrystalSpec& crystal);

// two passes through the crystal per round trip: chi (1 + exp(i(dk l + psi)))/2
std::complex<double> round_trip_coupling(const CouplingResult& c, double T, const CrystalSpec& crystal);

// |chi_rt|/d_eff as a function of x = dk l / 2 and the fractional period phase
double double_pass_envelope(double x, double psi);

double degeneracy_temperature(double Lambda, const CrystalSpec& crystal, double lambda0);

inline double wavelength_um(double w) { return 2.0 * pi * c_light / w * 1e6; }
inline double angular_frequency(double lam_m) { return 2.0 * pi * c_light / lam_m; }

}  // namespace opo
