/*
   Copyright 2026 The switchavg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// switchavg <command> --config <file> [--out <dir>] [--seed <u64>] [--threads <n>]

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "switchavg/cli.hpp"
#include "switchavg/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Simulation and averaging diagnostics for fast-switching diffusions"};
    app.require_subcommand(0, 1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    bool print_example = false;
    app.add_flag("--print-example-config", print_example, "Print the builtin example configuration and exit");

    for (const auto& name : switchavg::cli::commands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory (default: config output_dir or $SWITCHAVG_OUT)");
        sub->add_option("--seed", seed, "Top-level seed (overrides simulation.seed)");
        sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    }
    CLI11_PARSE(app, argc, argv);

    if (print_example) {
        std::cout << switchavg::holling_example_config();
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        switchavg::Scenario scenario = switchavg::parse_config(config_path);
        if (!out_dir.empty()) {
            scenario.output_dir = out_dir;
        } else if (const char* env = std::getenv("SWITCHAVG_OUT"); env && *env) {
            scenario.output_dir = env;
        }
        if (app.get_subcommands().front()->count("--seed") > 0) scenario.simulation.seed = seed;

        switchavg::cli::RunOptions run;
        run.threads = threads;
        run.log = &std::cout;
        for (const auto& path : switchavg::cli::execute(scenario, command, run)) std::cout << "wrote " << path << '\n';
    } catch (const switchavg::ConfigError& e) {
        std::cerr << "error [ConfigError:" << e.key() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
