#include <CLI11.hpp>

#include <iostream>

#include "gqn/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Graph query networks on radar BEV grids"};
  app.require_subcommand(1);

  std::string config_path;
  gqn::cli::Overrides overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run config (defaults apply when omitted)");
    sub->add_option("--seed", overrides.seed, "seed; overrides the config file");
    sub->add_option("--out", overrides.output, "output directory");
    sub->add_option("--threads", overrides.threads, "worker threads")->check(CLI::PositiveNumber);
  };
  add_common(app.add_subcommand("run", "run the pipeline and write maps, globals and metadata"));
  add_common(app.add_subcommand("gradcheck", "compare gradients with finite differences"));
  add_common(app.add_subcommand("bench", "analytic cost report and benchmark table"));
  add_common(app.add_subcommand("train-demo", "toy training loop, writes the loss curve"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gqn::cli::kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return gqn::cli::dispatch(command, config_path, overrides, std::cout, std::cerr);
}
