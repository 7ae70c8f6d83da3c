#pragma once

#include <filesystem>
#include <string>

namespace hvolt::cli {

enum class Command { check, solve, certify, probe, compare_oracle };

/// Maps a subcommand name to its Command; throws ConfigError for unknown
/// names.
Command parse_command(const std::string& name);

struct RunOptions {
    bool force = false;   // override a failed assumption check (recorded)
    unsigned seed = 12345; // sampling grids in the checkers
};

/// Executes one run: parses the JSON config, assembles the instance, runs
/// the command and writes summary.json plus the CSV artifacts into out_dir.
/// Returns the process exit status: 0 pass, 1 assumption/certificate
/// failure, 2 non-convergence, 3 config error.
int run(Command command, const std::filesystem::path& config_path,
        const std::filesystem::path& out_dir, const RunOptions& options = {});

} // namespace hvolt::cli
