#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "json.hpp"
#include "opo/config.hpp"
#include "opo/dispersion.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static const fs::path d = [] {
        auto p = fs::temp_directory_path() / ("opo_cli_" + std::to_string(::getpid()));
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

// exit status of `opo args`, stderr kept in err.txt
int run_opo(const std::string& args) {
    const std::string cmd = std::string(OPO_BIN) + " " + args + " > " + (scratch() / "out.txt").string() + " 2> " +
                            (scratch() / "err.txt").string();
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::vector<std::map<std::string, std::string>> csv(const fs::path& p) {
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    std::vector<std::string> head;
    std::stringstream hs(line);
    for (std::string c; std::getline(hs, c, ',');) head.push_back(c);
    std::vector<std::map<std::string, std::string>> rows;
    while (std::getline(f, line)) {
        std::stringstream ls(line);
        std::map<std::string, std::string> r;
        std::size_t i = 0;
        for (std::string c; std::getline(ls, c, ',');) r[head.at(i++)] = c;
        rows.push_back(r);
    }
    return rows;
}

std::string dir(const std::string& name) { return (scratch() / name).string(); }
const std::string cfg = std::string("--config ") + OPO_CONFIG;

}  // namespace

TEST_CASE("cli: dispersion tables") {
    REQUIRE(run_opo("dispersion " + cfg + " --period-um 31.1 31.2 --temp-c 150 --out " + dir("d")) == 0);
    const auto rows = csv(scratch() / "d" / "dispersion_period.csv");
    REQUIRE(rows.size() == 2);
    const double T = std::stod(rows[0].at("T_QPM_C"));
    CHECK(std::abs(T - 162) <= 8);
    // a one-point sweep equals the direct call
    const auto s = opo::load_setup(OPO_CONFIG);
    CHECK(T == doctest::Approx(opo::degeneracy_temperature(31.1e-6, s.cavity.crystal, 1.064e-6)).epsilon(1e-11));
    CHECK(fs::exists(scratch() / "d" / "dispersion_temperature.csv"));
    CHECK(fs::exists(scratch() / "d" / "manifest.json"));
}

TEST_CASE("cli: usage errors") {
    CHECK(run_opo("dispersion " + cfg + " --out " + dir("e")) == 2);
    CHECK(run_opo("scan " + cfg + " --window-um 0 --out " + dir("e")) == 2);
    CHECK(run_opo("scan --policy greedy --out " + dir("e")) == 2);
    CHECK(run_opo("reduce --n1 x.csv --n3 y.csv --out " + dir("e")) == 2);
    CHECK(run_opo("frobnicate") == 2);
    CHECK(run_opo("") == 2);
    std::ofstream(scratch() / "bad.ini") << "[crystal]\nperiod_um = -3\n";
    CHECK(run_opo("dispersion --config " + (scratch() / "bad.ini").string() + " --period-um 31 --out " + dir("e")) == 2);
    CHECK(slurp(scratch() / "err.txt").find("crystal.period_um") != std::string::npos);
    CHECK(run_opo("--help") == 0);
}

TEST_CASE("cli: domain and data errors have their own codes") {
    // 270 C is outside the Sellmeier fit
    CHECK(run_opo("scan " + cfg + " --temp-offset-C 120 --out " + dir("e")) == 3);
    std::ofstream(scratch() / "junk.csv") << "no header\n";
    CHECK(run_opo("reduce --n1 " + (scratch() / "junk.csv").string() + " --n2 " + (scratch() / "junk.csv").string() + " --n3 " +
              (scratch() / "junk.csv").string() + " --electronic " + (scratch() / "junk.csv").string() + " --out " + dir("e")) == 4);
}

TEST_CASE("cli: the three scan conditions run and replay byte-identically") {
    const char* conds[3][2] = {{"-4.3", "2"}, {"-1.1", "4"}, {"-0.1", "8"}};
    for (auto& c : conds) {
        const std::string d = dir(std::string("scan") + c[1]);
        REQUIRE(run_opo("scan " + cfg + " --temp-offset-C " + c[0] + " --pump-ratio " + c[1] + " --out " + d) == 0);
        const auto rows = csv(fs::path(d) / "scan.csv");
        CHECK(rows.size() == 10641);
        int osc = 0;
        for (const auto& r : rows) osc += r.at("p") != "-1";
        CHECK(osc > 0);
        CHECK(rows[0].count("hop_flag") == 1);
        CHECK(rows[0].count("reflected_pump_mW") == 1);
    }
    const std::string a = dir("scan8"), b = dir("scan8_replay");
    REQUIRE(run_opo("replay " + a + "/manifest.json --out " + b) == 0);
    for (const char* f : {"scan.csv", "manifest.json"}) CHECK(slurp(fs::path(a) / f) == slurp(fs::path(b) / f));
    const auto m = nlohmann::json::parse(slurp(fs::path(a) / "manifest.json"));
    CHECK(m.at("command") == "scan");
    CHECK(m.at("outputs").size() == 1);
    CHECK(m.at("config").contains("crystal.period_um"));
    CHECK(m.contains("version"));
    CHECK(m.contains("seed"));
}

TEST_CASE("cli: noise scans") {
    REQUIRE(run_opo("noise " + cfg + " --temp-offset-C -0.1 --pump-ratio 8 --out " + dir("n8")) == 0);
    double best = 9;
    for (const auto& r : csv(scratch() / "n8" / "noise.csv"))
        if (r.at("physical") == "1" && r.at("p") != "-1") best = std::min(best, std::stod(r.at("S_min")));
    CHECK(std::abs(best - 0.56) <= 0.10);

    REQUIRE(run_opo("noise " + cfg + " --pump-ratio 0.5 --window-um 0.05 --out " + dir("nb")) == 0);
    for (const auto& r : csv(scratch() / "nb" / "noise.csv")) CHECK(std::stod(r.at("S_min")) == 1);

    // 100 pump bandwidths
    const auto s = opo::load_setup(OPO_CONFIG);
    const double f = 100 * opo::cavity_bandwidth(opo::Band::pump, s.cavity, s.cavity.crystal.T) / (2 * opo::pi) / 1e6;
    REQUIRE(run_opo("noise " + cfg + " --pump-ratio 4 --window-um 0.01 --omega-mhz " + std::to_string(f) + " --out " + dir("nh")) == 0);
    for (const auto& r : csv(scratch() / "nh" / "noise.csv")) CHECK(std::abs(std::stod(r.at("S_min")) - 1) < 1e-6);
}

TEST_CASE("cli: synthetic fixture through reduce, with and without extra loss") {
    REQUIRE(run_opo("synth-traces " + cfg + " --samples 120 --s-min 0.62 --seed 4 --out " + dir("f")) == 0);
    const auto f = scratch() / "f";
    const std::string traces = " --n1 " + (f / "n1.csv").string() + " --n2 " + (f / "n2.csv").string() + " --n3 " +
                               (f / "n3.csv").string() + " --electronic " + (f / "electronic.csv").string();
    REQUIRE(run_opo("reduce " + cfg + traces + " --out " + dir("r")) == 0);
    CHECK_FALSE(fs::exists(scratch() / "r" / "loss.csv"));
    const auto planted = csv(f / "planted.csv");
    const auto norm = csv(scratch() / "r" / "normalized.csv");
    const auto rep = nlohmann::json::parse(slurp(scratch() / "r" / "report.json"));
    const double eta = rep.at("efficiency").at("total");
    REQUIRE(planted.size() == norm.size());
    for (std::size_t i = 0; i < norm.size(); ++i)
        CHECK(1 + (std::stod(norm[i].at("N")) - 1) / eta == doctest::Approx(std::stod(planted[i].at("S"))).epsilon(1e-6));
    double smin = 9;
    for (const auto& r : planted) smin = std::min(smin, std::stod(r.at("S")));
    CHECK(double(rep.at("inferred_source_min")) == doctest::Approx(smin).epsilon(1e-6));

    REQUIRE(run_opo("reduce " + cfg + traces + " --gamma 0.46 --out " + dir("rg")) == 0);
    const auto loss = csv(scratch() / "rg" / "loss.csv");
    for (std::size_t i = 0; i < loss.size(); ++i)
        CHECK(std::stod(loss[i].at("N_loss")) == doctest::Approx(0.54 * std::stod(norm[i].at("N")) + 0.46).epsilon(1e-10));

    // the seed is recorded and reproduces the fixture
    REQUIRE(run_opo("replay " + (f / "manifest.json").string() + " --out " + dir("f2")) == 0);
    for (const char* n : {"n1.csv", "n2.csv", "n3.csv", "electronic.csv", "planted.csv", "manifest.json"})
        CHECK(slurp(f / n) == slurp(scratch() / "f2" / n));
    REQUIRE(run_opo("synth-traces " + cfg + " --samples 120 --s-min 0.62 --seed 5 --out " + dir("f3")) == 0);
    CHECK(slurp(f / "n1.csv") != slurp(scratch() / "f3" / "n1.csv"));
}

TEST_CASE("cli: Monte-Carlo command is reproducible from its seed") {
    REQUIRE(run_opo("mc " + cfg + " --samples 200000 --seed 9 --out " + dir("m")) == 0);
    REQUIRE(run_opo("replay " + dir("m") + "/manifest.json --out " + dir("m2")) == 0);
    CHECK(slurp(scratch() / "m" / "mc.csv") == slurp(scratch() / "m2" / "mc.csv"));
    CHECK(nlohmann::json::parse(slurp(scratch() / "m" / "manifest.json")).at("seed") == 9);
}
