#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cdf/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cdf-lab: audit, simulate and study conservation-dissipation models"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  bool override_audit = false;
  for (const auto& name : cdf::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory (default: the config's \"output\" or ./out)");
    sub->add_flag("--override-audit", override_audit, "run models that fail the structural audit");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cdf::kConfigurationError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "configuration error: cannot read " << config_path << "\n";
    return cdf::kConfigurationError;
  }
  std::stringstream text;
  text << in.rdbuf();

  cdf::CommandOptions opt;
  opt.override_audit = override_audit;
  opt.log = &std::cout;
  try {
    opt.threads = cdf::threads_from_env(std::getenv("CDF_LAB_THREADS"));
    opt.out_dir = out_dir.empty() ? cdf::parse_config(text.str(), command).output_dir : out_dir;
  } catch (const cdf::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return cdf::kConfigurationError;
  } catch (const cdf::ParameterError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return cdf::kConfigurationError;
  }
  const int code = cdf::execute(command, text.str(), opt, std::cerr);
  std::cout << command << ": " << (code == 0 ? "pass" : code == 1 ? "FAIL" : "configuration error") << "\n";
  return code;
}
