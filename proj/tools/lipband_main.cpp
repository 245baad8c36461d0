// Command line front end.  All real work lives in lipband::cmd_* so the
// tests can drive it in-process.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lipband/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"multiplayer lipschitz bandit experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;
    int jobs = 0;
    std::vector<std::uint64_t> horizons;
    std::string verify_config;
    std::string plot_dir;
    int rc = 0;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "experiment config file")->required();
        cmd->add_option("--out", out_dir, "output directory (overrides the config)");
        cmd->add_option("--seed", seed, "root seed (overrides the config)");
        cmd->add_option("--trials", trials, "trial count (overrides the config)");
        cmd->add_option("--jobs", jobs, "worker threads, 0 = auto");
    };
    const auto overrides = [&](CLI::App* cmd) {
        lipband::CliOverrides ov;
        if (cmd->count("--out")) ov.out_dir = out_dir;
        if (cmd->count("--seed")) ov.seed = seed;
        if (cmd->count("--trials")) ov.trials = trials;
        ov.jobs = jobs;
        return ov;
    };

    CLI::App* run = app.add_subcommand("run", "run one experiment and write traces");
    add_common(run);
    run->callback([&] { rc = lipband::cmd_run(config_path, overrides(run)); });

    CLI::App* sweep = app.add_subcommand("sweep", "rerun a config across horizons");
    add_common(sweep);
    sweep->add_option("--horizons", horizons, "comma separated horizons, at least three")
        ->required()
        ->delimiter(',');
    sweep->callback([&] { rc = lipband::cmd_sweep(config_path, horizons, overrides(sweep)); });

    CLI::App* verify = app.add_subcommand("verify", "run the invariant battery");
    verify->add_option("-c,--config", verify_config, "also validate this config file");
    verify->callback([&] {
        std::optional<std::string> cfg;
        if (verify->count("--config")) cfg = verify_config;
        rc = lipband::cmd_verify(cfg);
    });

    CLI::App* plot = app.add_subcommand("plot-data", "aggregate trial traces into a curve");
    plot->add_option("dir", plot_dir, "experiment output directory")->required();
    plot->callback([&] { rc = lipband::cmd_plot_data(plot_dir); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return rc;
}
