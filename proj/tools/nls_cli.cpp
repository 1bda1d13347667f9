#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "nls/errors.hpp"
#include "nls/harness/config.hpp"
#include "nls/harness/experiments.hpp"
#include "nls/harness/record.hpp"

namespace {

using namespace nls::harness;

struct Options {
  std::string config;
  std::optional<std::string> method;
  std::optional<std::string> dt;
  std::optional<std::string> m;
  std::optional<std::string> T;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

int run(Scenario scenario, const Options& o) {
  ExperimentConfig cfg = load_config(o.config, scenario);
  std::vector<std::pair<std::string, std::string>> overrides;
  if (o.method) overrides.emplace_back("method", *o.method);
  if (o.dt) overrides.emplace_back("dt", *o.dt);
  if (o.m) overrides.emplace_back("m", *o.m);
  if (o.T) overrides.emplace_back("T", *o.T);
  if (o.out) overrides.emplace_back("out", *o.out);
  if (o.format) overrides.emplace_back("format", *o.format);
  if (!overrides.empty()) apply_overrides(cfg, overrides);

  const ScenarioResult result = run_scenario(cfg);
  if (cfg.out.empty()) {
    if (cfg.format == OutputFormat::json)
      std::cout << to_json_text(result, cfg);
    else
      std::cout << to_csv(result.tables.front());
  } else {
    for (const auto& path : emit(result, cfg, cfg.out, cfg.format)) std::cerr << "wrote " << path << "\n";
  }
  for (const auto& r : result.runs)
    for (const auto& w : r.record.warnings) std::cerr << "warning: " << r.label << ": " << w << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear Schrodinger experiments"};
  app.require_subcommand(1);

  const std::vector<std::pair<Scenario, std::string>> scenarios = {
      {Scenario::convergence, "Observed orders over a dt sweep against the exact soliton"},
      {Scenario::invariant_table, "Maximum mass and energy drifts"},
      {Scenario::error_growth, "Error against time and the fitted growth exponent"},
      {Scenario::work_precision, "Error against runtime over dt or tolerance sweeps"},
      {Scenario::semiclassical, "Densities and errors against a fine reference"},
  };
  Options opts;
  std::optional<Scenario> chosen;
  for (const auto& [scenario, help] : scenarios) {
    CLI::App* sub = app.add_subcommand(to_string(scenario), help);
    sub->add_option("--config", opts.config, "Key = value config file")->required();
    sub->add_option("--method", opts.method, "Method list, e.g. \"SP-AK4, SP-ImEx4(R)(EC)\"");
    sub->add_option("--dt", opts.dt, "Step sizes (fractions allowed)");
    sub->add_option("--m", opts.m, "Number of grid points");
    sub->add_option("--T", opts.T, "Final time");
    sub->add_option("--out", opts.out, "Output path; stdout when omitted");
    sub->add_option("--format", opts.format, "csv or json");
    sub->callback([&chosen, scenario = scenario] { chosen = scenario; });
  }

  CLI11_PARSE(app, argc, argv);
  try {
    return run(*chosen, opts);
  } catch (const nls::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nls::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
