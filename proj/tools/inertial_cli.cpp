#include "inertial/experiment.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

int run(inertial::Command command, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot open config " << config_path << "\n";
    return inertial::exit_code::config;
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return inertial::exit_code::config;
  }
  const auto outcome = inertial::run_experiment(command, doc, out_dir, seed);
  if (outcome.code != inertial::exit_code::success) {
    std::cerr << "error: " << outcome.message << "\n";
  }
  return outcome.code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy Ball / vanishing damping experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::int64_t seed = -1;

  for (const char* name : {"simulate", "compare", "validate", "certify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed overriding the config")->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return inertial::exit_code::config;
  }

  const auto command = inertial::command_from_string(app.get_subcommands().front()->get_name());
  std::optional<std::uint64_t> seed_override;
  if (seed >= 0) seed_override = static_cast<std::uint64_t>(seed);
  return run(command, config_path, out_dir, seed_override);
}
