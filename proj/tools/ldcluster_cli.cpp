#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "ldcluster/commands.hpp"
#include "ldcluster/config.hpp"
#include "ldcluster/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Large-deviation clustering toolkit for moving average processes"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> output;
  std::optional<std::string> format;

  const std::map<std::string, std::string> about{
      {"prob", "saddlepoint approximation of P(E_0), optionally with an importance-sampling estimate"},
      {"cluster-law", "law of the exceedance pattern around a conditioning window"},
      {"cluster-size", "limiting cluster sizes D- and D+ per draw"},
      {"scaling", "eps^2 E D against the Brownian limit for a decreasing eps list"},
      {"time-change", "Monte Carlo check of the time change identity"},
      {"brownian-ref", "quadrature value of the Brownian limit functional"},
  };
  for (const auto& name : ldc::command_names()) {
    const auto it = about.find(name);
    CLI::App* sub = app.add_subcommand(name, it == about.end() ? "" : it->second);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--workers", workers, "worker threads (overrides the config)")->check(CLI::Range(1, 1024));
    sub->add_option("--output", output, "output file (default: stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ldc::RunConfig cfg = ldc::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (output) cfg.output = *output;
    if (format) cfg.format = *format;

    const ldc::CommandResult result = ldc::run_command(command, cfg);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    if (cfg.output && !cfg.output->empty() && *cfg.output != "-") {
      std::ofstream out(*cfg.output, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot open output '" << *cfg.output << "'\n";
        return 2;
      }
      out << result.body;
    } else {
      std::cout << result.body;
    }
  } catch (const ldc::PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ldc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
