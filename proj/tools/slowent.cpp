#include "slowent/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"slowent: finite-stage slow-entropy experiments"};
    app.set_version_flag("--version", std::string(slowent::kVersion));
    app.require_subcommand(1);

    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    unsigned threads = 1;
    for (const auto& name : slowent::experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config, "JSON config file")->required();
        sub->add_option("--seed", seed, "seed (overrides config)");
        sub->add_option("--out", out, "output directory (overrides config)");
        sub->add_option("--threads", threads, "worker cap; results do not depend on it")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string experiment = app.get_subcommands().front()->get_name();
    slowent::RunOptions opts;
    opts.seed = seed;
    opts.out = out;
    opts.threads = threads;
    return slowent::run_experiment(experiment, config, opts, std::cout, std::cerr);
}
