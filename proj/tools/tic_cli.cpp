#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tic/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"nonlocal parabolic PDE solver for time-inconsistent control"};
    app.require_subcommand(1);

    std::string config_path, output_dir;
    bool verbose = false;
    int threads = 1;

    auto* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "JSON run configuration")->required();
    run->add_option("--output-dir", output_dir,
                    "override the config's output directory");
    run->add_flag("--verbose", verbose, "print per-check results");
    run->add_option("--threads", threads, "cap worker threads")
        ->check(CLI::PositiveNumber);

    auto* list = app.add_subcommand(
        "list", "list built-in models and experiment tags");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        std::cout << tic::list_registry();
        return 0;
    }
    return tic::run_from_file(config_path, output_dir, verbose, threads);
}
