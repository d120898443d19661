#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "multibump/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Positive multibump solutions of -u'' = lambda u + a(x) u^p with Dirichlet conditions"};
    app.require_subcommand(1);

    multibump::RunOptions opts;
    std::optional<int> threads;
    std::optional<int> grid_N;
    std::optional<unsigned> seed;

    const std::map<std::string, std::string> about{
        {"solve", "Newton multistart at one lambda"},
        {"count", "Shooting scan at one lambda, classified by index set"},
        {"classify", "Classify every shooting solution; exit 1 if any is unclassified"},
        {"sweep", "Newton multistart over the lambda grid with empirical thresholds"},
        {"continue", "Follow the branch from the first eigenvalue toward negative lambda"},
        {"verify", "Run the lower-bound, nonexistence, decay and dichotomy checks"},
        {"liouville", "Half-line exit checks over the configured parameter grid"},
        {"degree-table", "Box degrees on the shooting solution set"},
    };
    for (const std::string& name : multibump::commands()) {
        CLI::App* sub = app.add_subcommand(name, about.count(name) ? about.at(name) : "");
        sub->add_option("--spec", opts.spec_path, "JSON problem spec")->required();
        sub->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
        sub->add_option("--threads", threads, "Worker threads (overrides the spec)");
        sub->add_option("--grid-N", grid_N, "Interior grid nodes (overrides the spec)");
        sub->add_option("--seed", seed, "Seed recorded in the artifacts (overrides the spec)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return multibump::SpecInvalid;
    }

    opts.threads = threads;
    opts.grid_N = grid_N;
    opts.seed = seed;
    const std::string command = app.get_subcommands().front()->get_name();
    return multibump::run(command, opts, std::cout, std::cerr);
}
