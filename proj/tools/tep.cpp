// tep: parameter sweeps for the driven two-resonator model.
//
//   tep spectrum [--config FILE] [--out FILE] [--cutoff N] [--json]
//   tep ep-scan | lep-scan | liouvillian-check | trajectories ...
//
// Exit status: 0 success, 1 bad configuration, 2 numerical failure.
// TEP_WORKERS sets the number of worker threads.

#include "thermal_ep/sweep.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<int> cutoff;
    std::optional<std::uint64_t> seed;
    bool json = false;
    bool print_config = false;
};

int run(tep::SweepMode mode, const Options& opt) {
    tep::SweepConfig config = opt.config.empty() ? tep::default_config(mode) : tep::load_config(opt.config, mode);
    if (opt.cutoff) {
        config.cutoff = *opt.cutoff;
    }
    if (opt.seed) {
        config.trajectories.seed = *opt.seed;
    }
    if (!opt.out.empty()) {
        config.output = opt.out;
    }
    config.json = config.json || opt.json;
    config.validate();

    if (opt.print_config) {
        std::cout << tep::config_to_json(config) << '\n';
        return 0;
    }
    if (config.output.empty()) {
        return tep::run_command(config, std::cout, nullptr);
    }
    std::ofstream file(config.output);
    if (!file) {
        throw tep::ConfigError("cannot open output file '" + config.output + "'");
    }
    return tep::run_command(config, file, &std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exceptional-point sweeps for two coupled driven resonators"};
    app.set_version_flag("--version", std::string(TEP_VERSION));
    app.require_subcommand(1);

    Options opt;
    const std::pair<const char*, const char*> commands[] = {
        {"spectrum", "tracked eigenvalues of H_nH and H_PT against the closed forms"},
        {"ep-scan", "locate the Hamiltonian EP by eigenvector coalescence"},
        {"lep-scan", "locate the Liouvillian EP of the first-moment equations"},
        {"liouvillian-check", "compare the Liouvillian spectrum with -gamma +/- i Omega"},
        {"trajectories", "quantum-jump ensembles against the master equation"},
    };
    std::optional<tep::SweepMode> chosen;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output file (default stdout)");
        sub->add_option("--cutoff", opt.cutoff, "Fock levels per mode");
        sub->add_option("--seed", opt.seed, "trajectory seed");
        sub->add_flag("--json", opt.json, "JSON lines instead of CSV");
        sub->add_flag("--print-config", opt.print_config, "print the resolved configuration and exit");
        const std::string mode_name = name;
        sub->callback([&chosen, mode_name] { chosen = tep::parse_mode(mode_name); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        return run(*chosen, opt);
    } catch (const tep::ConfigError& e) {
        std::cerr << "tep: configuration error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "tep: " << e.what() << '\n';
        return 2;
    }
}
