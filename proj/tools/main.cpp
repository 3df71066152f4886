#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dunkl/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Simulation lab for radial Dunkl processes"};
    app.set_version_flag("--version", dunkl::version_string());
    app.require_subcommand(1);

    std::string config_path;
    dunkl::Overrides overrides;
    std::string output_dir;
    int threads = -1;

    auto* run = app.add_subcommand("run", "Run the experiment and write CSV/JSON results");
    run->add_option("config", config_path, "Experiment file (JSON)")->required();
    run->add_option("-o,--output-dir", output_dir, "Output directory (overrides config and environment)");
    run->add_option("-j,--threads", threads, "Thread budget; 0 uses every hardware thread")
        ->check(CLI::NonNegativeNumber);

    auto* describe = app.add_subcommand("describe", "Print derived quantities without simulating");
    describe->add_option("config", config_path, "Experiment file (JSON)")->required();

    auto* validate = app.add_subcommand("validate", "Check the file and the model conditions");
    validate->add_option("config", config_path, "Experiment file (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dunkl::kExitInvalid;
    }

    if (!output_dir.empty()) {
        overrides.output_dir = output_dir;
    }
    if (threads >= 0) {
        overrides.threads = threads;
    }
    if (*run) {
        return dunkl::command_run(config_path, overrides, std::cout, std::cerr);
    }
    if (*describe) {
        return dunkl::command_describe(config_path, std::cout, std::cerr);
    }
    return dunkl::command_validate(config_path, std::cout, std::cerr);
}
