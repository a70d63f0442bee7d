#pragma once
#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "opo/steady_state.hpp"

namespace opo {

// thrown when the reflected mean field vanishes and the intensity quadrature is undefined
struct UndefinedQuadratureError : DomainError {
    using DomainError::DomainError;
};

// time in units of 1/kappa0 (pump HWHM), white inputs of unit spectral density
struct FluctuationModel {
    Eigen::Matrix<double, 6, 6> A;
    Eigen::MatrixXd B;               // 6 x ports
    Eigen::Matrix<double, 2, 6> C;
    Eigen::MatrixXd D;               // 2 x ports, direct feed of the input port
    std::vector<std::string> ports;  // two real columns per name
    std::array<cd, 3> rate_scale;    // c_k
    double tau = 0, kappa0 = 0;
    cd E_out;                        // mean reflected pump
    double E_in_abs = 0;
    double passivity_margin = 0;     // < 0: loss budget cannot supply the damping
    bool physical = true;
    bool reference_stable = true;
};

FluctuationModel linearize(const SteadyState& s, const CavitySpec& cav);

// 2x2 covariance of the reflected pump quadratures at Omega (units of kappa0)
Eigen::Matrix2d output_covariance(const FluctuationModel& m, double Omega);

double pump_quadrature_spectrum(const FluctuationModel& m, double theta, double Omega);

struct Squeezing {
    double theta_min;  // [0, pi)
    double S_min;
    double S_max;      // at theta_min + pi/2
};
Squeezing optimum_squeezing(const FluctuationModel& m, double Omega);

double intensity_noise(const FluctuationModel& m, double Omega);

struct NoiseSample {
    double L_offset = 0;
    int p = -1;
    double S_min = 1, theta_min = 0, S_intensity = 1;
    bool physical = true;
};

struct SqueezingTrace {
    ScanTrace scan;
    std::vector<NoiseSample> samples;
};

SqueezingTrace squeezing_scan(const ScanWindow& w, double T, double P_in, double Omega, const CavitySpec& cav);

double omega_from_hz(double f_hz, const CavitySpec& cav, double T);

struct LangevinEstimate {
    double S;        // Monte-Carlo estimate
    double stderr_;  // standard error over segments
    double exact;    // frequency-domain value at the same theta, Omega
    std::size_t samples;
};

// exact-discretization Euler-free simulation of dx = A x dt + B dW with Welch averaging at Omega
LangevinEstimate langevin_spectrum_mc(const FluctuationModel& m, double theta, double Omega, std::size_t samples,
                                      std::uint64_t seed, double dt = 0.1, std::size_t segment = 2000);

}  // namespace opo
