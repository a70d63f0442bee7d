#pragma once
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "opo/dispersion.hpp"

namespace opo {

enum class Band { pump, ir };

struct MirrorSpec {
    Band band = Band::pump;
    double R = 1.0;
    double T = 0.0;
    double A = 0.0;

    static MirrorSpec make(Band band, double R, double T);
};

struct LossItem {
    std::string name;
    double loss;  // intensity, per round trip
};

struct LossLedger {
    Band band = Band::pump;
    std::vector<LossItem> items;

    double total() const;
    // amplitude survival over one round trip, sqrt(prod(1 - loss))
    double amplitude() const;
};

struct CavitySpec {
    double L_cav = 65e-3;      // geometric, m
    double lambda0 = 1.064e-6; // pump wavelength, m
    MirrorSpec pump_in, pump_end, ir_in, ir_end;
    CrystalSpec crystal;

    double w0() const { return angular_frequency(lambda0); }
    LossLedger ledger(Band band) const;
    double t0() const;    // input coupler amplitude transmission (pump)
    double r_in() const;  // input coupler amplitude reflection (pump)
    double r0() const;    // pump round-trip amplitude factor, all losses
    double r() const;     // signal/idler round-trip amplitude factor
    void validate() const;
};

struct PhaseValue {
    double wrapped;    // (-pi, pi]
    double unwrapped;
};

struct DetuningSet {
    PhaseValue phi0, phi1, phi2;
};

double wrap_phase(double x);

template <typename Scalar>
Scalar propagation_phase(Scalar w, double T, const CavitySpec& cav) {
    const double l = cav.crystal.length_at(T);
    const Scalar lam = Scalar(2 * pi * c_light) / w * Scalar(1e6);
    const Scalar n = sellmeier_index<Scalar>(cav.crystal.sellmeier, lam, Scalar(T));
    return Scalar(2) * w / Scalar(c_light) * (Scalar(cav.L_cav - l) + n * Scalar(l));
}

// pump mirror-phase offset making phi0 - phi1 - phi2 = 2 dk l + 2 psi exactly
double pump_phase_offset(const CavitySpec& cav);

PhaseValue round_trip_phase(double w, Band band, const CavitySpec& cav, double T);

// d(unwrapped phase)/d omega, i.e. the group round-trip time
double group_delay(double w, const CavitySpec& cav, double T);
double round_trip_time(const CavitySpec& cav, double T);

struct FinesseResult {
    double finesse;
    LossLedger ledger;
};
FinesseResult finesse(Band band, const CavitySpec& cav);

// HWHM amplitude decay rate -ln(r)/tau, rad/s
double cavity_bandwidth(Band band, const CavitySpec& cav, double T);

// signal frequency of mode p at length L: Phi(w1) - Phi(w0 - w1) = 2 p pi
double mode_signal_frequency(int p, double L, double T, const CavitySpec& cav, double guess = 0.0);

std::vector<double> double_resonance_lengths(double T, int p, const CavitySpec& cav, double L_lo, double L_hi);

struct FilterCavitySpec {
    double round_trip_length = 0.70;
    std::array<double, 3> mirror_R{0.995, 0.995, 0.999};
    std::optional<double> measured_finesse;
    bool locked = true;

    double derived_finesse() const;
    double finesse() const;
    double fsr_hz() const { return c_light / round_trip_length; }
    double bandwidth_hz() const { return fsr_hz() / finesse(); }
};

double filter_transfer(double Omega_hz, const FilterCavitySpec& spec);
double filter_noise_transmission(double Omega_hz, double S_in, const FilterCavitySpec& spec);

}  // namespace opo
