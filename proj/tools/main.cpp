#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "hvolt/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Monotone Picard solver for Hammerstein-Volterra integral equations "
                 "with concave nonlinearity"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    bool force = false;
    unsigned seed = 12345;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run configuration")->required();
        cmd->add_option("--out", out_dir, "output directory for summary.json and CSVs");
        cmd->add_flag("--force", force, "override a failed assumption check (recorded)");
        cmd->add_option("--seed", seed, "seed for the checker sampling grids");
    };

    add_common(app.add_subcommand("check", "validate the instance against the assumptions"));
    add_common(app.add_subcommand("solve", "run the monotone Picard iteration"));
    add_common(app.add_subcommand("certify",
                                  "solve and verify the a-priori geometric error bound"));
    add_common(app.add_subcommand("probe",
                                  "compare upper-start and lower-start limits (uniqueness)"));
    add_common(app.add_subcommand("compare-oracle",
                                  "cross-check the solver against a brute-force reference"));

    CLI11_PARSE(app, argc, argv);

    try {
        const auto command = hvolt::cli::parse_command(app.get_subcommands().front()->get_name());
        hvolt::cli::RunOptions options;
        options.force = force;
        options.seed = seed;
        return hvolt::cli::run(command, config_path, out_dir, options);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
