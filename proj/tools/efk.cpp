#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fourth-order bistable equation solver and verification runner"};
  app.require_subcommand(1);
  std::string config, out;
  for (const char* name : {"analyze", "kink1d", "solve", "verify", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "flat key = value configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : efk::cli::kExitConfig;
  }
  return efk::cli::run_command(app.get_subcommands().front()->get_name(), config, out, std::cerr);
}
