// Command-line front end: blab <simulate|td-run|verify|analyze> --config <path> [--set key=value]...

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "blab/app/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral Boussinesq / transport-diffusion laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string estimate;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file (key = value lines)")->required();
    sub->add_option("--set", overrides, "override a configuration key, key=value")->take_all();
  };
  for (const char* name : {"simulate", "td-run", "verify", "analyze"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub);
    if (std::string(name) == "verify") {
      sub->add_option("--estimate", estimate, "single estimate to sample")
          ->check(CLI::IsMember(blab::app::estimate_names()));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : blab::app::kUsageError;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  overrides.insert(overrides.begin(), "subcommand=" + sub);
  if (!estimate.empty()) overrides.push_back("verify.estimates=" + estimate);

  blab::io::RunConfig cfg;
  try {
    cfg = blab::io::load_config(config_path, overrides);
  } catch (const blab::io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return blab::app::kUsageError;
  }
  return blab::app::dispatch(cfg, std::cout, std::cerr);
}
