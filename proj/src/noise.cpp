#include "opo/noise.hpp"

#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

namespace opo {

FluctuationModel linearize(const SteadyState& s, const CavitySpec& cav) {
    const RoundTrip rt = round_trip(s, cav);
    const Eigen::Vector3cd E = fields(s);
    const double T = cav.crystal.T;
    FluctuationModel m;
    m.tau = round_trip_time(cav, T);
    m.kappa0 = -std::log(rt.r0) / m.tau;
    const double k = m.kappa0 * m.tau;  // rates below are per round trip, divided by k for kappa0 units

    const std::array<cd, 3> u{rt.u0(), rt.u1(), rt.u2()};
    // 1/u_k keeps the parametric coupling Hamiltonian
    for (int i = 0; i < 3; ++i) m.rate_scale[i] = 1.0 / u[i];

    const Eigen::Matrix<double, 6, 6> J = map_jacobian(rt, E);
    m.A = J - Eigen::Matrix<double, 6, 6>::Identity();
    for (int i = 0; i < 3; ++i) m.A.middleRows<2>(2 * i) = real_block<double>(m.rate_scale[i], 0) * m.A.middleRows<2>(2 * i);
    m.A /= k;

    // per-round-trip damping 2 gamma_k tau
    std::array<double, 3> g2;
    for (int i = 0; i < 3; ++i) g2[i] = -2 * (m.rate_scale[i] * (u[i] - 1.0)).real();
    const cd d = m.rate_scale[0] * rt.t0;  // drive coefficient times tau
    const double rest0 = g2[0] - std::norm(d);
    m.passivity_margin = std::min({rest0, g2[1], g2[2]});
    m.physical = m.passivity_margin >= -1e-12;

    const auto lp = cav.ledger(Band::pump), li = cav.ledger(Band::ir);
    const int ports = 1 + int(lp.items.size()) - 1 + 2 * int(li.items.size());
    m.B = Eigen::MatrixXd::Zero(6, 2 * ports);
    m.D = Eigen::MatrixXd::Zero(2, 2 * ports);
    int col = 0;
    auto add = [&](int mode, const Eigen::Matrix2d& blk, const std::string& name) {
        m.B.block<2, 2>(2 * mode, col) = blk / std::sqrt(k);
        m.ports.push_back(name);
        col += 2;
    };
    add(0, real_block<double>(d, 0), "pump input");
    m.D.block<2, 2>(0, 0) = -Eigen::Matrix2d::Identity();
    double other = 0;
    for (std::size_t i = 1; i < lp.items.size(); ++i) other += lp.items[i].loss;
    for (std::size_t i = 1; i < lp.items.size(); ++i)
        add(0, Eigen::Matrix2d::Identity() * std::sqrt(std::max(rest0, 0.0) * lp.items[i].loss / other),
            "pump " + lp.items[i].name);
    for (int md = 1; md <= 2; ++md)
        for (const auto& it : li.items)
            add(md, Eigen::Matrix2d::Identity() * std::sqrt(std::max(g2[md], 0.0) * it.loss / li.total()),
                (md == 1 ? "signal " : "idler ") + it.name);

    m.C.setZero();
    m.C.block<2, 2>(0, 0) = real_block<double>(std::conj(d), 0) / std::sqrt(k);
    m.E_out = reflected_pump(s, cav);
    m.E_in_abs = std::abs(s.drive.E_in);
    m.reference_stable = s.stable;
    return m;
}

Eigen::Matrix2d output_covariance(const FluctuationModel& m, double Omega) {
    using CM = Eigen::Matrix<cd, 6, 6>;
    const CM G = cd(0, Omega) * CM::Identity() - m.A.cast<cd>();
    const Eigen::MatrixXcd X = G.partialPivLu().solve(m.B.cast<cd>());
    const Eigen::MatrixXcd M = m.C.cast<cd>() * X + m.D.cast<cd>();
    return (M * M.adjoint()).real();
}

double pump_quadrature_spectrum(const FluctuationModel& m, double theta, double Omega) {
    if (Omega < 0) throw DomainError("analysis frequency must be >= 0");
    const Eigen::Vector2d e(std::cos(theta), std::sin(theta));
    return e.dot(output_covariance(m, Omega) * e);
}

Squeezing optimum_squeezing(const FluctuationModel& m, double Omega) {
    const Eigen::Matrix2d S = output_covariance(m, Omega);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
    const Eigen::Vector2d v = es.eigenvectors().col(0);
    double th = std::atan2(v(1), v(0));
    th = std::fmod(th + 2 * pi, pi);
    if (th >= pi) th -= pi;
    return {th, es.eigenvalues()(0), es.eigenvalues()(1)};
}

double intensity_noise(const FluctuationModel& m, double Omega) {
    if (!(std::abs(m.E_out) > 1e-9 * m.E_in_abs))
        throw UndefinedQuadratureError("reflected pump vanishes (impedance matched), intensity quadrature undefined");
    return pump_quadrature_spectrum(m, std::arg(m.E_out), Omega);
}

double omega_from_hz(double f_hz, const CavitySpec& cav, double T) {
    return 2 * pi * f_hz / cavity_bandwidth(Band::pump, cav, T);
}

SqueezingTrace squeezing_scan(const ScanWindow& w, double T, double P_in, double Omega, const CavitySpec& cav) {
    SqueezingTrace out;
    CavitySpec c = cav;
    c.crystal.T = T;
    out.scan = scan_cavity(w, T, P_in, Policy::lowest_threshold, c);
    out.samples.reserve(out.scan.samples.size());
    for (const auto& smp : out.scan.samples) {
        NoiseSample ns;
        ns.L_offset = smp.L_offset;
        ns.p = smp.p;
        if (smp.state) {
            CavitySpec cl = c;
            cl.L_cav = w.L_ref + smp.L_offset;
            const auto m = linearize(*smp.state, cl);
            const auto sq = optimum_squeezing(m, Omega);
            ns.S_min = sq.S_min;
            ns.theta_min = sq.theta_min;
            ns.physical = m.physical;
            try {
                ns.S_intensity = intensity_noise(m, Omega);
            } catch (const UndefinedQuadratureError&) {
                ns.S_intensity = NAN;
            }
        }
        out.samples.push_back(ns);
    }
    return out;
}

LangevinEstimate langevin_spectrum_mc(const FluctuationModel& m, double theta, double Omega, std::size_t samples,
                                      std::uint64_t seed, double dt, std::size_t segment) {
    if (segment < 16 || samples < segment) throw ArgumentError("need at least one full segment");
    const Eigen::Vector2d e(std::cos(theta), std::sin(theta));
    const int p = int(m.B.cols());

    // augmented state (x, integral of the output quadrature over one step)
    Eigen::Matrix<double, 7, 7> Aa = Eigen::Matrix<double, 7, 7>::Zero();
    Aa.topLeftCorner<6, 6>() = m.A;
    Aa.block<1, 6>(6, 0) = e.transpose() * m.C;
    Eigen::MatrixXd Ba(7, p);
    Ba.topRows(6) = m.B;
    Ba.row(6) = e.transpose() * m.D;

    // Van Loan: transition matrix and discrete noise covariance
    Eigen::Matrix<double, 14, 14> V = Eigen::Matrix<double, 14, 14>::Zero();
    V.topLeftCorner<7, 7>() = -Aa * dt;
    V.topRightCorner<7, 7>() = Ba * Ba.transpose() * dt;
    V.bottomRightCorner<7, 7>() = Aa.transpose() * dt;
    const Eigen::Matrix<double, 14, 14> EV = V.exp();
    const Eigen::Matrix<double, 7, 7> Phi = EV.bottomRightCorner<7, 7>().transpose();
    Eigen::Matrix<double, 7, 7> Q = Phi * EV.topRightCorner<7, 7>();
    Q = 0.5 * (Q + Q.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 7, 7>> es(Q);
    const Eigen::Matrix<double, 7, 7> Lq =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;

    std::vector<double> win(segment);
    double w2 = 0;
    for (std::size_t n = 0; n < segment; ++n) {
        win[n] = 0.5 - 0.5 * std::cos(2 * pi * (double(n) + 0.5) / double(segment));
        w2 += win[n] * win[n];
    }

    Eigen::Matrix<double, 7, 1> x = Eigen::Matrix<double, 7, 1>::Zero(), z;
    auto step = [&]() {
        x(6) = 0;
        for (int i = 0; i < 7; ++i) z(i) = nd(rng);
        x = Phi * x + Lq * z;
        return x(6);
    };
    // burn in
    const std::size_t burn = std::size_t(std::ceil(200.0 / dt));
    for (std::size_t i = 0; i < burn; ++i) step();

    const std::size_t K = samples / segment;
    std::vector<double> P(K);
    for (std::size_t k = 0; k < K; ++k) {
        cd acc = 0;
        for (std::size_t n = 0; n < segment; ++n) {
            const double y = step();
            acc += win[n] * y * std::polar(1.0, -Omega * dt * double(n));
        }
        P[k] = std::norm(acc) / (dt * w2);
    }
    double mean = 0;
    for (double v : P) mean += v;
    mean /= double(K);
    double var = 0;
    for (double v : P) var += (v - mean) * (v - mean);
    var /= double(K - 1);
    return {mean, std::sqrt(var / double(K)), pump_quadrature_spectrum(m, theta, Omega), K * segment};
}

}  // namespace opo
