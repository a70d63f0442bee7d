#include <doctest.h>

#include <random>

#include "opo/config.hpp"
#include "opo/dispersion.hpp"

using namespace opo;

namespace {

CrystalSpec crystal() { return default_setup().cavity.crystal; }

const double w0 = angular_frequency(1.064e-6);

}  // namespace

TEST_CASE("extraordinary index matches the reference table") {
    const auto m = crystal().sellmeier;
    // values from tests/oracles/oracle.py
    CHECK(refractive_index(1.064, 158.63, m) == doctest::Approx(2.16236652843926).epsilon(1e-13));
    CHECK(refractive_index(2.128, 158.63, m) == doctest::Approx(2.12822778957096).epsilon(1e-13));
    CHECK(refractive_index(0.8, 25, m) == doctest::Approx(2.17580269743954).epsilon(1e-13));
    CHECK(refractive_index(3.0, 200, m) == doctest::Approx(2.10417668004751).epsilon(1e-13));
    CHECK(group_index(2.128, 158.63, m) == doctest::Approx(2.18601280955461).epsilon(1e-9));
}

TEST_CASE("index outside the fit window is refused") {
    const auto m = crystal().sellmeier;
    CHECK_THROWS_AS(refractive_index(0.3, 100, m), DomainError);
    CHECK_THROWS_AS(refractive_index(5.5, 100, m), DomainError);
    CHECK_THROWS_AS(refractive_index(1.0, 10, m), DomainError);
    CHECK_THROWS_AS(refractive_index(1.0, 300, m), DomainError);
    CHECK_THROWS_WITH_AS(refractive_index(6.0, 100, m), doctest::Contains("lambda_max_um"), DomainError);
}

TEST_CASE("degeneracy temperature of the 31.1 um grating") {
    const auto cr = crystal();
    const double T = degeneracy_temperature(31.1e-6, cr, 1.064e-6);
    CHECK(T == doctest::Approx(158.629135388231).epsilon(1e-10));
    CHECK(std::abs(T - 162) <= 8);
    CHECK(degeneracy_temperature(31.2e-6, cr, 1.064e-6) == doctest::Approx(140.577077658106).epsilon(1e-10));
    CHECK(degeneracy_temperature(31.029e-6, cr, 1.064e-6) == doctest::Approx(171.101018724096).epsilon(1e-10));
    CHECK(degeneracy_temperature(30.686e-6, cr, 1.064e-6) == doctest::Approx(228.005422303435).epsilon(1e-10));
}

TEST_CASE("without thermal expansion the fit lands outside 162 +- 8 C") {
    auto cr = crystal();
    cr.expansion.alpha = cr.expansion.beta = 0;
    const double T = degeneracy_temperature(31.1e-6, cr, 1.064e-6);
    CHECK(T == doctest::Approx(171.544196090132).epsilon(1e-10));
    CHECK(std::abs(T - 162) > 8);
}

TEST_CASE("no degeneracy inside the window is reported, not extrapolated") {
    CHECK_THROWS_AS(degeneracy_temperature(30.0e-6, crystal(), 1.064e-6), NotFoundError);
}

TEST_CASE("T_QPM falls monotonically with grating period where it exists") {
    const auto cr = crystal();
    double prev = INFINITY;
    int found = 0;
    for (int i = 0; i < 8; ++i) {
        const double L = (30.0 + 1.2 * i / 7) * 1e-6;
        try {
            const double T = degeneracy_temperature(L, cr, 1.064e-6);
            CHECK(T < prev);
            prev = T;
            ++found;
        } catch (const NotFoundError&) {
            // short periods need more than 250 C
            CHECK(found == 0);
        }
    }
    CHECK(found >= 4);
}

TEST_CASE("bulk mismatch at degeneracy") {
    CHECK(bulk_mismatch(w0 / 2, w0 / 2, 150, crystal()) == doctest::Approx(201314.760591487).epsilon(1e-11));
}

TEST_CASE("frequency pair must conserve energy") {
    CHECK_NOTHROW(FrequencyPair(0.6 * w0, 0.4 * w0, w0));
    CHECK_THROWS_AS(FrequencyPair(0.6 * w0, 0.41 * w0, w0), DomainError);
    CHECK_THROWS_AS(FrequencyPair(1.2 * w0, -0.2 * w0, w0), DomainError);
    CHECK_THROWS_AS(bulk_mismatch(-1.0, w0, 150, crystal()), DomainError);
}

TEST_CASE("sinc") {
    CHECK(sinc(0.0) == 1.0);
    CHECK(sinc(0.3) == doctest::Approx(0.985067355537799).epsilon(1e-14));
    CHECK(sinc(1e-5) == doctest::Approx(1 - 1e-10 / 6).epsilon(1e-15));
    CHECK(std::abs(sinc(pi)) < 1e-16);
}

TEST_CASE("QPM coupling at the degeneracy temperature") {
    auto cr = crystal();
    const double Tq = degeneracy_temperature(cr.Lambda, cr, 1.064e-6);
    const auto c = qpm_coupling(w0 / 2, w0 / 2, Tq, cr);
    CHECK(std::abs(c.delta_kappa) < 1e-6);
    CHECK(std::abs(c.chi) == doctest::Approx(cr.d_eff * 2 / pi).epsilon(1e-12));
    // bulk coupling is far off phase matching and much weaker
    CHECK(std::abs(c.chi_bulk) < 0.01 * std::abs(c.chi));
    // one pass and two passes agree at dk = 0, psi = 0
    CHECK(std::abs(round_trip_coupling(c, Tq, cr)) == doctest::Approx(std::abs(c.chi)).epsilon(1e-9));
}

TEST_CASE("coupling is symmetric under signal-idler exchange") {
    const auto cr = crystal();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> frac(0.3, 0.7), temp(100, 200);
    for (int i = 0; i < 50; ++i) {
        const double w1 = frac(rng) * w0, T = temp(rng);
        const auto a = qpm_coupling(w1, w0 - w1, T, cr), b = qpm_coupling(w0 - w1, w1, T, cr);
        CHECK(std::abs(a.chi - b.chi) <= 1e-10 * std::abs(a.chi));
        CHECK(a.delta_kappa == doctest::Approx(b.delta_kappa).epsilon(1e-12));
    }
}

TEST_CASE("QPM magnitude never exceeds 2/pi of d_eff") {
    const auto cr = crystal();
    for (double T = 60; T <= 240; T += 7)
        for (double f = 0.35; f <= 0.65; f += 0.01) {
            const auto c = qpm_coupling(f * w0, (1 - f) * w0, T, cr);
            CHECK(std::abs(c.chi) <= cr.d_eff * 2 / pi * (1 + 1e-12));
            CHECK(std::abs(round_trip_coupling(c, T, cr)) <= std::abs(c.chi) * (1 + 1e-12));
        }
}
