#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "opo/config.hpp"
#include "opo/homodyne.hpp"

using namespace opo;

namespace {

DetectionChain chain() { return load_setup(OPO_CONFIG).chain; }

MeasuredTrace trace(TraceLabel l, std::vector<double> dbm, AnalyzerSettings s = {}) { return {l, s, std::move(dbm)}; }

std::vector<double> planted(std::size_t n) {
    std::vector<double> S(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double th = 2 * 3.14159265358979 * double(k) / double(n), c = std::cos(th), s = std::sin(th);
        S[k] = 0.62 * c * c + 2.4 * s * s;
    }
    return S;
}

NormalizedNoise reduce(const SyntheticTraces& t) {
    return normalize(dbm_to_linear(t.n1, t.electronic), dbm_to_linear(t.n2, t.electronic), dbm_to_linear(t.n3, t.electronic));
}

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

}  // namespace

TEST_CASE("dBm conversion and electronic-noise subtraction") {
    CHECK(dbm_to_mw(0) == 1);
    CHECK(mw_to_dbm(1) == 0);
    const auto el = trace(TraceLabel::electronic, {-102.6, -102.6});
    const auto lin = dbm_to_linear(trace(TraceLabel::combined, {-90}), el);
    CHECK(lin.mw[0] == doctest::Approx(9.45045912614238e-10).epsilon(1e-13));
    CHECK(lin.flags[0] == flag_none);
    // a sample at the electronic level is floored and flagged
    const auto fl = dbm_to_linear(trace(TraceLabel::combined, {-102.6, -110}), el, 1e-20);
    CHECK(fl.mw[0] == 1e-20);
    CHECK(fl.flags[0] == flag_floor);
    CHECK(fl.flags[1] == flag_floor);
}

TEST_CASE("mismatched analyzer settings are a hard error") {
    AnalyzerSettings other;
    other.rbw_hz = 300e3;
    const auto el = trace(TraceLabel::electronic, {-102.6}, other);
    CHECK_THROWS_AS(dbm_to_linear(trace(TraceLabel::combined, {-90}), el), DataError);
    LinearTrace a{{}, {1.0}, {0}}, b{other, {1.0}, {0}};
    CHECK_THROWS_AS(normalize(a, b, a), DataError);
    CHECK_THROWS_AS(trace(TraceLabel::combined, {NAN}).validate(), DataError);
}

TEST_CASE("homodyne variance with a finite pump beam") {
    DetectionChain c;
    c.eta_qe = c.visibility = c.eta_path = 1;
    c.I_W = 0;
    c.I_LO_W = 1.2e-3;
    // I = 0 is the plain balanced-homodyne form
    CHECK(homodyne_variance(0.7, c) == doctest::Approx(1.2e-3 * 0.7).epsilon(1e-15));
    c.I_W = 0.45e-3;
    const double corr = homodyne_variance(1, c) - homodyne_variance(1, {1, 1, 1, 0, 0, 1.2e-3});
    CHECK(corr / 1.2e-3 == doctest::Approx(0.375).epsilon(1e-12));
    // coherent in, coherent out, for any chain
    for (const auto& ch : {chain(), c}) {
        const auto t = synthesize_traces(std::vector<double>(20, 1.0), ch, {});
        for (double N : reduce(t).N) CHECK(N == doctest::Approx(1).epsilon(1e-10));
    }
}

TEST_CASE("normalize") {
    LinearTrace n2{{}, {2, 3, 4}, {0, 0, 0}}, n3{{}, {1, 1, 0.5}, {0, 0, 0}};
    LinearTrace n1{{}, {3, 4, 4.5}, {0, 1, 0}};
    const auto N = normalize(n1, n2, n3);
    for (double v : N.N) CHECK(v == doctest::Approx(1));
    CHECK(N.flags[1] == 1);
    // common gain drops out
    for (auto* t : {&n1, &n2, &n3})
        for (double& v : t->mw) v *= 7.5;
    const auto M = normalize(n1, n2, n3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(M.N[i] == doctest::Approx(N.N[i]).epsilon(1e-14));
    n2.mw[2] = 0;
    CHECK_THROWS_WITH_AS(normalize(n1, n2, n3), doctest::Contains("sample 2"), DataError);
}

TEST_CASE("apply_loss") {
    CHECK(apply_loss(0.70, 0.46) == doctest::Approx(0.8380).epsilon(1e-15));
    CHECK(apply_loss(0.70, 0.46) == 0.838);
    CHECK(apply_loss(0.7, 0) == 0.7);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> N(0.2, 3), G(0, 0.95);
    for (int i = 0; i < 200; ++i) {
        const double n = N(rng), g1 = G(rng), g2 = G(rng);
        CHECK(apply_loss(1, g1) == doctest::Approx(1).epsilon(1e-15));
        CHECK(std::abs(apply_loss(n, g1) - 1) == doctest::Approx((1 - g1) * std::abs(n - 1)).epsilon(1e-12));
        CHECK(apply_loss(apply_loss(n, g1), g2) == doctest::Approx(apply_loss(n, 1 - (1 - g1) * (1 - g2))).epsilon(1e-12));
    }
    CHECK_THROWS_AS(apply_loss(0.7, 1.0), DomainError);
}

TEST_CASE("source inference and the back-computed path efficiency") {
    const auto c = chain();
    CHECK(c.efficiency() == doctest::Approx(0.30 / 0.38).epsilon(1e-12));
    CHECK(c.eta_path == doctest::Approx((0.30 / 0.38) / (0.94 * 0.97 * 0.97)).epsilon(1e-12));
    CHECK(infer_source_noise(0.70, c.efficiency()) == doctest::Approx(0.62).epsilon(1e-12));
    CHECK(infer_source_noise(0.8, 1) == 0.8);
    for (double S : {0.1, 0.5, 1.0, 2.5}) CHECK(infer_source_noise(apply_efficiency(S, 0.63), 0.63) == doctest::Approx(S).epsilon(1e-12));
    CHECK_THROWS_AS(infer_source_noise(0.3, 0.5), DomainError);
    CHECK_THROWS_AS(infer_source_noise(0.9, 0), DomainError);
}

TEST_CASE("closure: planted spectra survive synthesis and reduction") {
    const auto c = chain();
    const auto S = planted(180);
    const auto N = reduce(synthesize_traces(S, c, {}));
    for (std::size_t k = 0; k < S.size(); ++k) CHECK(infer_source_noise(N.N[k], c.efficiency()) == doctest::Approx(S[k]).epsilon(1e-6));
    const auto r = reduction_report(N, c);
    CHECK(r.source_min == doctest::Approx(0.62).epsilon(1e-6));
    CHECK(r.min_N == doctest::Approx(0.70).epsilon(1e-6));
    CHECK(r.floored == 0);
    CHECK(r.eta_path == c.eta_path);
}

TEST_CASE("attenuated data equals the loss formula applied to unattenuated data") {
    auto c = chain();
    const auto S = planted(90);
    const auto clean = reduce(synthesize_traces(S, c, {}));
    c.gamma = 0.46;
    const auto att = reduce(synthesize_traces(S, c, {}));
    for (std::size_t k = 0; k < S.size(); ++k) CHECK(std::abs(att.N[k] - apply_loss(clean.N[k], 0.46)) < 1e-10);
}

TEST_CASE("trace files round trip and reject bad headers") {
    auto t = trace(TraceLabel::lo_shot, {-80.123456789012345, -81.5});
    t.settings.center_hz = 6e6;
    write_trace(tmp("opo_trace.csv"), t);
    const auto u = read_trace(tmp("opo_trace.csv"));
    CHECK(u.label == TraceLabel::lo_shot);
    CHECK(u.settings == t.settings);
    CHECK(u.dbm == t.dbm);
    std::ofstream(tmp("opo_bad.csv")) << "# label: N1\n# rbw_hz: 1e5\nindex,dbm\n0,-80\n";
    CHECK_THROWS_WITH_AS(read_trace(tmp("opo_bad.csv")), doctest::Contains("vbw_hz"), DataError);
    std::ofstream(tmp("opo_bad2.csv")) << "# label: N7\n";
    CHECK_THROWS_AS(read_trace(tmp("opo_bad2.csv")), DataError);
    CHECK_THROWS_AS(read_trace(tmp("does_not_exist.csv")), DataError);
}
