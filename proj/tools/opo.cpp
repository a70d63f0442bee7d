#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"

namespace {

enum Exit { ok = 0, usage = 2, domain = 3, data = 4 };

void common(CLI::App* sc, opo::cli::Options& o) {
    sc->add_option("--config", o.config, "ini file (defaults built in when omitted)")->check(CLI::ExistingFile);
    sc->add_option("--out", o.out, "output directory")->capture_default_str();
}

void condition(CLI::App* sc, opo::cli::Options& o) {
    sc->add_option("--temp-offset-C", o.temp_offset_c, "crystal temperature relative to T_QPM")->capture_default_str();
    sc->add_option("--pump-ratio", o.pump_ratio, "pump power over the minimum threshold")->capture_default_str();
    sc->add_option("--window-um", o.window_um, "scan width, centred on the degenerate double resonance");
    sc->add_option("--step-nm", o.step_nm, "length step")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    using opo::cli::Options;
    Options o;
    std::string manifest;

    CLI::App app{"Triply resonant OPO: dispersion, mode scans, squeezing spectra and homodyne data reduction"};
    app.set_version_flag("--version", opo::cli::tool_version);
    app.require_subcommand(1);

    auto* disp = app.add_subcommand("dispersion", "T_QPM versus grating period, mismatch and coupling versus temperature");
    common(disp, o);
    disp->add_option("--period-um", o.period_um, "grating periods to solve for T_QPM");
    disp->add_option("--temp-c", o.temp_c, "temperatures for the mismatch table");

    auto* scan = app.add_subcommand("scan", "mean fields along a cavity-length scan");
    common(scan, o);
    condition(scan, o);
    scan->add_option("--policy", o.policy, "lowest | sticky")->check(CLI::IsMember({"lowest", "sticky"}))->capture_default_str();
    scan->add_flag("--reverse", o.reverse, "scan from long to short cavity");

    auto* noise = app.add_subcommand("noise", "optimum squeezing along a cavity-length scan");
    common(noise, o);
    condition(noise, o);
    noise->add_option("--omega-mhz", o.omega_mhz, "analysis frequency")->capture_default_str();

    auto* mc = app.add_subcommand("mc", "Monte-Carlo Langevin check at the degenerate double resonance");
    common(mc, o);
    condition(mc, o);
    mc->add_option("--omega-mhz", o.omega_mhz, "analysis frequency")->capture_default_str();
    mc->add_option("--seed", o.seed, "random seed")->capture_default_str();
    mc->add_option("--samples", o.mc_samples, "time steps")->capture_default_str();

    auto* reduce = app.add_subcommand("reduce", "normalize measured spectrum-analyzer traces");
    common(reduce, o);
    reduce->add_option("--n1", o.n1, "combined trace")->required()->check(CLI::ExistingFile);
    reduce->add_option("--n2", o.n2, "LO shot-noise trace")->required()->check(CLI::ExistingFile);
    reduce->add_option("--n3", o.n3, "pump shot-noise trace")->required()->check(CLI::ExistingFile);
    reduce->add_option("--electronic", o.electronic, "electronic background trace")->required()->check(CLI::ExistingFile);
    reduce->add_option("--gamma", o.gamma, "also emit the trace with this extra loss applied")->check(CLI::Range(0.0, 0.999999));

    auto* synth = app.add_subcommand("synth-traces", "write a synthetic N1/N2/N3/electronic fixture");
    common(synth, o);
    synth->add_option("--samples", o.samples, "phase samples")->capture_default_str();
    synth->add_option("--s-min", o.s_min, "planted minimum variance")->capture_default_str();
    synth->add_option("--s-max", o.s_max, "planted maximum variance")->capture_default_str();
    synth->add_option("--gamma", o.gamma, "attenuator loss in the squeezed beam")->check(CLI::Range(0.0, 0.999999));
    synth->add_option("--seed", o.seed, "fixes the LO phase offset")->capture_default_str();

    auto* rep = app.add_subcommand("replay", "re-run a manifest into a new directory");
    rep->add_option("manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", o.out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        std::vector<std::string> files;
        if (rep->parsed()) {
            files = opo::cli::replay(manifest, o.out);
        } else {
            o.command = app.get_subcommands().front()->get_name();
            opo::Setup s;
            try {
                s = o.config.empty() ? opo::default_setup() : opo::load_setup(o.config);
            } catch (const opo::DomainError& e) {
                // a bad config is the caller's mistake
                std::cerr << "usage error: " << e.what() << '\n';
                return usage;
            }
            files = opo::cli::run(o, s);
        }
        for (const auto& f : files) std::cout << f << '\n';
        return ok;
    } catch (const opo::ArgumentError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const opo::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data;
    } catch (const opo::DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return domain;
    } catch (const opo::NotFoundError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return domain;
    }
}
