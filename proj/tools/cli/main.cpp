#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kernel-regularised weak feature maps and transversality diagnostics"};
  std::string subcommand, scenario, out;
  int seed = 0;
  std::string names;
  for (const auto& n : weaktrans::cli::subcommands()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("subcommand", subcommand, "One of: " + names)->required();
  app.add_option("--scenario", scenario, "Scenario JSON file")->required();
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--seed", seed, "Reserved; currently unused");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : weaktrans::cli::validation_error;
  }
  return weaktrans::cli::run(subcommand, scenario, out, std::cerr);
}
