#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cqed/cli.hpp"

namespace {

struct Flag {
    const char *name;
    const char *key;
    const char *help;
};

constexpr Flag kFlags[] = {
    {"--alpha", "alpha", "Coherent amplitude of the initial field"},
    {"--dim", "dim", "Fock-space truncation"},
    {"--shots", "shots", "Number of GHZ-test shots"},
    {"--seed", "seed", "64-bit RNG seed"},
    {"--gt", "gt", "Probe interaction time g*tau (default: optimal)"},
    {"--phi", "phi", "Conditional phase per cascade atom"},
    {"--mode", "mode", "GHZ mode: atomic or hybrid"},
    {"--sign", "sign", "GHZ sign: + or -"},
    {"--variant", "variant", "Bell variant: phi+, phi-, psi+, psi-"},
    {"--output", "output", "Report path (default: stdout)"},
    {"--format", "format", "json or csv (sweep tables only)"},
    {"--delta-over-g", "delta_over_g", "Comma-separated detuning ratios"},
    {"--threads", "threads", "Worker threads for ghz-test"},
};

} // namespace

int main(int argc, char **argv) {
    namespace cli = cqed::cli;

    CLI::App app{"Cavity QED entanglement and GHZ-test simulator"};
    app.set_version_flag("--version", std::string(cli::kVersion));
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "Flat key = value config file")
        ->check(CLI::ExistingFile);

    std::map<std::string, std::string> values;
    for (const Flag &flag : kFlags) {
        app.add_option(flag.name, values[flag.key], flag.help);
    }
    for (const std::string &name : cli::commands()) {
        app.add_subcommand(name);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kValidation;
    }

    cli::KeyValues flags;
    for (const Flag &flag : kFlags) {
        if (app.count(flag.name) > 0) {
            flags[flag.key] = values[flag.key];
        }
    }

    cli::RunConfig config;
    try {
        const cli::KeyValues file =
            config_path.empty() ? cli::KeyValues{} : cli::read_config_file(config_path);
        config = cli::resolve_config(file, flags);
    } catch (const cqed::Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kValidation;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const cli::CommandResult result = cli::execute(command, config);
    if (result.exit_code != cli::kSuccess) {
        std::cerr << "error: " << result.error << '\n';
        return result.exit_code;
    }

    if (config.output.empty()) {
        std::cout << result.report;
    } else {
        std::ofstream out(config.output, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write output '" << config.output << "'\n";
            return cli::kValidation;
        }
        out << result.report;
    }
    return cli::kSuccess;
}
