// twpa: batch driver for the SNAIL TWPA simulator and analysis pipelines.
//
//   twpa <command> [--config FILE] [--seed N] [--out DIR] [--profile ci|full]
//
// Exit codes: 0 ok, 1 runtime or solver error, 2 configuration error.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "twpa/commands.hpp"
#include "twpa/config.hpp"
#include "twpa/errors.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

const std::map<std::string, std::string> kDescriptions = {
    {"coeffs", "SNAIL expansion coefficients versus external flux"},
    {"flux-sweep", "three-wave idler power versus flux, disorder off and on"},
    {"gain-phase", "degenerate gain versus pump phase"},
    {"sms", "single-mode squeezing from synthetic quadrature records"},
    {"tms", "two-mode squeezing and logarithmic negativity"},
    {"sntj-fit", "shot-noise tunnel junction fits for gain and noise temperature"},
    {"normalize", "quadrature normalization factor"},
    {"attenuation", "input attenuation ledger"},
};

struct Flags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::string profile = "ci";
    std::optional<unsigned> threads;
    bool quiet = false;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SNAIL TWPA simulation and Gaussian-state analysis"};
    app.require_subcommand(1);
    Flags flags;
    for (const auto& name : twpa::cli::command_names()) {
        CLI::App* sub = app.add_subcommand(name, kDescriptions.at(name));
        sub->add_option("--config", flags.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--seed", flags.seed, "master seed (overrides the config file)");
        sub->add_option("--out", flags.out, "output directory (overrides the config file)");
        sub->add_option("--profile", flags.profile, "default set: ci (100 cells) or full (700 cells)")
            ->check(CLI::IsMember({"ci", "full"}));
        sub->add_option("--threads", flags.threads, "worker threads for sweeps (0: all cores)");
        sub->add_flag("--quiet", flags.quiet, "no progress on stderr");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    twpa::config::RunConfig cfg;
    try {
        const auto profile = twpa::config::profile_from_string(flags.profile);
        cfg = flags.config_path.empty() ? twpa::config::parse(nlohmann::json::object(), profile)
                                        : twpa::config::load(flags.config_path, profile);
        if (flags.seed) cfg.master_seed = *flags.seed;
        if (flags.out) cfg.output_dir = *flags.out;
        if (flags.threads) cfg.threads = *flags.threads;
    } catch (const twpa::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    twpa::cli::Progress progress;
    if (!flags.quiet) {
        progress = [](const std::string& stage, std::size_t done, std::size_t total) {
            std::cerr << "[" << stage << "] " << done << "/" << total << "\n";
        };
    }

    try {
        const auto out = twpa::cli::run_command(command, cfg, progress);
        twpa::cli::write_output(command, cfg, out);
        if (!flags.quiet) {
            std::cerr << "wrote " << cfg.output_dir << "/" << (out.is_csv() ? "result.csv" : "result.json")
                      << "\n";
        }
    } catch (const twpa::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
