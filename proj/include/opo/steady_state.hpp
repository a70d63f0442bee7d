#pragma once
#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "opo/cavity.hpp"

namespace opo {

using cd = std::complex<double>;

struct PumpDrive {
    cd E_in;       // sqrt(photon flux)
    double P_in;   // W
    double w0;

    static PumpDrive from_power(double P_in, double w0);
};

struct ModeSolution {
    int p = 0;
    double w1 = 0, w2 = 0;
    double dnu_THz = 0;
    DetuningSet detunings{};
    double P_th = 0;
    CouplingResult coupling;
    cd chi;               // round-trip coupling used in the field equations
    double residual = 0;  // |phi1 - phi2 - 2 p pi|, unwrapped
};

enum class Branch { trivial, lower, upper };
const char* branch_name(Branch b);

struct SteadyState {
    cd E0, E1, E2;
    ModeSolution mode;
    PumpDrive drive;
    Branch branch = Branch::trivial;
    bool stable = false;
};

// coefficients of the literal round-trip map
struct RoundTrip {
    double t0, r0, r1, r2;
    double phi0, phi1, phi2;
    cd chi;
    cd E_in;

    static RoundTrip from(const CavitySpec& cav, const DetuningSet& d, cd chi, cd E_in);
    cd u0() const { return std::polar(r0, phi0); }
    cd u1() const { return std::polar(r1, phi1); }
    cd u2() const { return std::polar(r2, phi2); }
};

template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, 3, 1> round_trip_map(const RoundTrip& m,
                                                          const Eigen::Matrix<std::complex<Scalar>, 3, 1>& E) {
    using C = std::complex<Scalar>;
    const C u0 = std::polar(Scalar(m.r0), Scalar(m.phi0));
    const C u1 = std::polar(Scalar(m.r1), Scalar(m.phi1));
    const C u2 = std::polar(Scalar(m.r2), Scalar(m.phi2));
    const C chi(m.chi.real(), m.chi.imag());
    const C ein(m.E_in.real(), m.E_in.imag());
    Eigen::Matrix<C, 3, 1> out;
    out(0) = Scalar(m.t0) * ein + u0 * (E(0) - std::conj(chi) * E(1) * E(2));
    out(1) = u1 * (E(1) + chi * E(0) * std::conj(E(2)));
    out(2) = u2 * (E(2) + chi * E(0) * std::conj(E(1)));
    return out;
}

// real 2x2 block of dE -> a dE + b conj(dE) in (Re, Im) coordinates
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> real_block(std::complex<Scalar> a, std::complex<Scalar> b) {
    Eigen::Matrix<Scalar, 2, 2> m;
    m << (a + b).real(), -(a - b).imag(), (a + b).imag(), (a - b).real();
    return m;
}

// complex coefficients a_ij (dE_j) and b_ij (conj dE_j) of the map linearization
struct MapLinearization {
    Eigen::Matrix3cd a = Eigen::Matrix3cd::Zero();
    Eigen::Matrix3cd b = Eigen::Matrix3cd::Zero();
};
MapLinearization linearize_map(const RoundTrip& m, const Eigen::Vector3cd& E);
Eigen::Matrix<double, 6, 6> map_jacobian(const RoundTrip& m, const Eigen::Vector3cd& E);

// d_eff giving the requested global minimum threshold (zero detunings, dk = 0, psi = 0)
double calibrate_coupling(const CavitySpec& cav, double P_min);

double clamp_pump(double phi1, double phi2, double r, cd chi);

double threshold(const ModeSolution& mode, const CavitySpec& cav);
double threshold_from_phases(double phi0, double phi1, cd chi, const CavitySpec& cav);

// minimum over frequency of the zero-detuning threshold at temperature T
double minimum_threshold(double T, const CavitySpec& cav);

// min over dk of the threshold at fractional period phase psi, relative to psi = 0
double threshold_penalty(double psi);
double max_threshold_penalty(double* psi_at_max = nullptr);

std::vector<SteadyState> solve_steady(const PumpDrive& drive, const DetuningSet& d, const ModeSolution& mode,
                                      const CavitySpec& cav);

Eigen::Vector3cd fields(const SteadyState& s);
RoundTrip round_trip(const SteadyState& s, const CavitySpec& cav);

cd reflected_pump(const SteadyState& s, const CavitySpec& cav);
double reflected_pump_power(const SteadyState& s, const CavitySpec& cav);

struct PhotonBalance {
    double pump_converted;  // per round trip, photon-flux units
    double signal_out;
    double idler_out;
};
PhotonBalance photon_balance(const SteadyState& s, const CavitySpec& cav);

ModeSolution make_mode(int p, double L, double T, const CavitySpec& cav, double guess = 0.0);
std::vector<ModeSolution> mode_catalog(double L, double T, int p_lo, int p_hi, const CavitySpec& cav);

// modes whose best-case (zero detuning) threshold is below P_in
std::vector<int> candidate_modes(double T, double P_in, const CavitySpec& cav);

// p = 0 double resonance nearest to the configured cavity length
double degenerate_resonance_length(double T, const CavitySpec& cav);

enum class Policy { lowest_threshold, sticky };

struct ScanWindow {
    double L_ref;   // m
    double lo, hi;  // offsets from L_ref, m
    double step;    // m
    bool reverse = false;
};

struct ScanSample {
    double L_offset = 0;
    int p = -1;  // -1: no oscillation
    double dnu_THz = 0;
    double signal_intensity = 0;  // |E1|^2
    double reflected_pump_W = 0;
    int hop = 0;                  // dp relative to previous oscillating sample
    std::optional<SteadyState> state;
};

struct ScanTrace {
    double T = 0, P_in = 0;
    Policy policy = Policy::lowest_threshold;
    std::vector<ScanSample> samples;
};

ScanTrace scan_cavity(const ScanWindow& w, double T, double P_in, Policy policy, const CavitySpec& cav);

struct Plateau {
    int p;
    std::size_t first, count;
};
std::vector<Plateau> plateaus(const ScanTrace& tr);

}  // namespace opo
