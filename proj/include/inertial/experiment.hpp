#pragma once

#include "inertial/diagnostics.hpp"
#include "inertial/dynamics.hpp"
#include "inertial/rescaling.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace inertial {

enum class Command { simulate, compare, validate, certify };

std::string to_string(Command command);
Command command_from_string(const std::string& name);

namespace exit_code {
inline constexpr int success = 0;
inline constexpr int config = 2;
inline constexpr int integration = 3;
inline constexpr int mapping_mismatch = 4;
}  // namespace exit_code

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CertifyRequest {
  std::string series;
  double exponent = 0.0;
  double window_start = 1.0;
};

/// A parsed system block.  `problem` is absent for validate-only configs.
struct SystemConfig {
  nlohmann::json raw;
  Variant variant = Variant::HBF_function;
  double horizon = 0.0;
  std::optional<SystemSpec> spec;
};

struct ExperimentConfig {
  Command command = Command::simulate;
  SystemConfig system;
  std::optional<SystemConfig> heavy;  // explicit twin for compare
  IntegratorControls integrator;
  int samples = 100;
  std::optional<double> eta;
  std::vector<CertifyRequest> certify;
  int compare_samples = 200;
  double twin_lambda = 1.0;
  double twin_t0 = 0.0;
  std::optional<double> map_alpha;
  std::uint64_t seed = 0;
};

/// Throws ConfigError on any schema violation.
ExperimentConfig parse_config(Command command, const nlohmann::json& doc,
                              std::optional<std::uint64_t> seed_override);

struct Outcome {
  int code = exit_code::success;
  std::string message;
};

/// Runs one experiment and writes its artifacts into out_dir.  Nothing is
/// written when the config is rejected.
Outcome run_experiment(Command command, const nlohmann::json& doc,
                       const std::filesystem::path& out_dir,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

Outcome run_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir);
Outcome run_compare(const ExperimentConfig& config, const std::filesystem::path& out_dir);
Outcome run_validate(const ExperimentConfig& config, const std::filesystem::path& out_dir);
Outcome run_certify(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Shortest round-trip decimal form (at most 17 significant digits).
std::string format_number(double value);

/// Header of trajectory.csv for a variant of dimension dim.
std::string trajectory_csv_header(int dim);

nlohmann::json to_json(const AssumptionReport& report);
nlohmann::json to_json(const RateCertificate& cert);
nlohmann::json to_json(const EquivalenceReport& report);

}  // namespace inertial
