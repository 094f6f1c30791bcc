// dualrisk: command-line front end.
//
//   dualrisk <solve|curve|heatmap|verify|asymptotics|simulate> [options]
//
// Configuration is layered: built-in scenario (--scenario), then the
// config file (--config), then --set key=value and the dedicated flags.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dualrisk/commands.hpp"

int main(int argc, char** argv) {
  using namespace dualrisk;
  CLI::App app{"Minimal ruin probabilities and optimal R&D / market strategies in the dual risk model"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path, format, scenario, knob;
  std::vector<std::string> assignments;
  std::uint64_t seed = 0, paths = 0;
  unsigned threads = 0;
  bool echo = false;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--scenario", scenario, "start from a built-in scenario configuration");
  app.add_option("--set", assignments, "override one key (key=value), repeatable");
  app.add_option("--out", out_path, "write output to this file");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo base seed");
  auto* paths_opt = app.add_option("--paths", paths, "Monte Carlo paths");
  auto* threads_opt = app.add_option("--threads", threads, "Monte Carlo worker threads");
  app.add_option("--knob", knob, "asymptotic sweep for the asymptotics subcommand");
  app.add_flag("--echo-config", echo, "print the effective configuration to stderr");

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Sub subs[] = {
      {"solve", "feasibility, exponent and optimal controls (JSON)", cmd_solve},
      {"curve", "value functions on an x grid (CSV)", cmd_curve},
      {"heatmap", "C* over a two-parameter grid (CSV)", cmd_heatmap},
      {"verify", "analytic values against simulation for a built-in scenario", cmd_verify},
      {"asymptotics", "parameter sweep toward a limiting regime (CSV)", cmd_asymptotics},
      {"simulate", "Monte Carlo ruin probability (JSON)", cmd_simulate},
  };
  for (const auto& s : subs) app.add_subcommand(s.name, s.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    RunConfig cfg;
    if (!scenario.empty()) cfg = scenario_config(scenario);
    if (!config_path.empty()) cfg.merge(RunConfig::load(config_path));
    for (const auto& a : assignments) cfg.set_assignment(a);
    if (!out_path.empty()) cfg.set("output.path", out_path);
    if (!format.empty()) cfg.set("output.format", format);
    if (*seed_opt) cfg.set("sim.seed", std::to_string(seed));
    if (*paths_opt) cfg.set("sim.paths", std::to_string(paths));
    if (*threads_opt) cfg.set("sim.threads", std::to_string(threads));
    if (!knob.empty()) cfg.set("task.knob", knob);
    if (echo) std::cerr << cfg.to_text();

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (cfg.has("output.path")) {
      file.open(cfg.text("output.path"));
      if (!file) throw ConfigError("cannot open output file '" + cfg.text("output.path") + "'");
      out = &file;
    }
    for (const auto& s : subs) {
      if (app.got_subcommand(s.name)) return s.fn(cfg, *out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
