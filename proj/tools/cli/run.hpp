#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace weaktrans::cli {

enum ExitCode : int { ok = 0, unknown_subcommand = 1, validation_error = 2, numerical_failure = 3 };

const std::vector<std::string>& subcommands();

/// Loads the scenario, runs the subcommand and writes <out_dir>/<subcommand>.json
/// and .csv. Nothing is written unless the whole computation succeeds.
int run(std::string_view subcommand, const std::string& scenario_path, const std::string& out_dir,
        std::ostream& err);

}  // namespace weaktrans::cli
