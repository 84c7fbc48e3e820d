#include <CLI11.hpp>

#include <iostream>

#include "hclab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hclab: random conductance, free field and level-set experiments"};
  app.require_subcommand(1);

  hclab::RunOptions options;
  std::uint64_t seed = 0;
  std::string out;
  for (const auto& name : hclab::subcommands()) {
    auto* sub = app.add_subcommand(name, name == "validate" ? "check a config without running solvers"
                                                            : "run the " + name + " pipeline");
    sub->add_option("--config", options.config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    if (name == "validate") continue;
    sub->add_option("--seed-override", seed, "replace master_seed");
    sub->add_option("--threads", options.threads, "worker threads (0 = hardware)");
    sub->add_option("--out", out, "output directory (defaults to the config's output)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hclab::kExitSchema;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->get_name() != "validate" && sub->count("--seed-override")) options.seed_override = seed;
  if (!out.empty()) options.out = out;
  return hclab::run(sub->get_name(), options, std::cerr);
}
