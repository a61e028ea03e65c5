/*
 * Argument surface only; everything substantive lives behind cli::run.
 */

#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "cutofflab/cli.hpp"
#include "cutofflab/errors.hpp"

namespace cli = cutofflab::cli;

int main(int argc, char** argv) {
  CLI::App app{"cutofflab: cut-off asymptotics of linear evolutions with small noise"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out = "out";
  std::string seed_text;
  std::string epsilon_text;
  std::string rgrid_text;
  std::string format_text = "csv";

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario, "scenario config JSON file")->required();
    sub->add_option("--out", out, "output directory (default: out)");
    sub->add_option("--seed", seed_text,
                    "RNG seed override, decimal or 0x hex (default: scenario seed)");
    sub->add_option("--epsilon", epsilon_text,
                    "comma separated ε list in (0,1) (default: 1e-2,1e-3,1e-4)");
    sub->add_option("--r-grid", rgrid_text, "window grid a:b:step (default: -3:3:0.5)");
    sub->add_option("--format", format_text, "artifact format: csv, json, or svg");
  };
  add_common(app.add_subcommand(
      "analyze", "spectral structure of the drift: rate, block size, modes, ω-limit set"));
  add_common(app.add_subcommand(
      "profile", "theoretical limiting profile over the window grid"));
  add_common(app.add_subcommand(
      "curve", "measured vs theoretical distance curves along the cut-off schedule"));
  add_common(app.add_subcommand(
      "classify", "profile vs window-only classification with envelopes"));
  add_common(app.add_subcommand("verify", "self-check suite for the scenario"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  cli::RunConfig config;
  config.scenario_path = scenario;
  config.out_dir = out;
  config.command = *cli::command_from_name(app.get_subcommands().front()->get_name());
  try {
    if (!seed_text.empty()) {
      char* end = nullptr;
      const unsigned long long seed = std::strtoull(seed_text.c_str(), &end, 0);
      if (end != seed_text.c_str() + seed_text.size())
        throw cutofflab::InadmissibleRange("--seed must be a decimal or 0x hex integer");
      config.seed = seed;
    }
    if (!epsilon_text.empty()) config.epsilons = cli::parse_epsilon_list(epsilon_text);
    if (!rgrid_text.empty()) config.r_grid = cli::parse_grid(rgrid_text);
    const auto format = cli::format_from_name(format_text);
    if (!format)
      throw cutofflab::InadmissibleRange("--format must be csv, json, or svg");
    config.format = *format;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cutofflab: config error: %s\n", e.what());
    return 1;
  }
  return cli::run(config);
}
