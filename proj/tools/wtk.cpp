// Command-line entry point: wtk --config <path> [--out <dir>] [--seed <u64>] [--scenario <name>]

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "wtk/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Weak-turbulence kinetic toolkit"};
  std::string config_path, out, seed, scenario;
  app.add_option("--config", config_path, "key=value configuration file")->required();
  app.add_option("--out", out, "output directory (overrides the file)");
  app.add_option("--seed", seed, "random seed (overrides the file)");
  app.add_option("--scenario", scenario, "scenario name (overrides the file)");
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot open config '" << config_path << "'\n";
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();
  std::vector<std::pair<std::string, std::string>> overrides;
  if (!scenario.empty()) overrides.emplace_back("scenario", scenario);
  if (!out.empty()) overrides.emplace_back("out", out);
  if (!seed.empty()) overrides.emplace_back("seed", seed);
  try {
    const wtk::RunConfig cfg = wtk::parse_config(text.str(), overrides);
    return wtk::run(cfg);
  } catch (const wtk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
