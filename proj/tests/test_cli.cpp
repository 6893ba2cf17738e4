#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "inertial/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace inertial;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "inertial_test_cli" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) { return json::parse(slurp(path)); }

std::vector<std::string> lines(const fs::path& path) {
  std::vector<std::string> out;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

json avd_config() {
  return json::parse(R"({
    "system": {"variant": "AVD_function", "problem": {"id": "quadratic", "dim": 2},
               "alpha": 4, "start_time": 1, "horizon": 50, "y0": [1, -1], "y1": [0, 0]},
    "outputs": {"samples": 100}
  })");
}

json fogda_config() {
  return json::parse(R"({
    "system": {"variant": "FOGDA_operator", "problem": {"id": "rotation", "dim": 2},
               "alpha": 4, "start_time": 1, "horizon": 1000, "y0": [1, 0], "y1": [0, 0]},
    "diagnostics": {"certify": [{"series": "operator_norm", "exponent": 1, "window_start": 10}]}
  })");
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(INERTIAL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("number formatting is shortest round-trip") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-2.5e-300) == "-2.5e-300");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("trajectory header") {
  CHECK(trajectory_csv_header(2) == "t,p_0,p_1,u_0,u_1,v_0,v_1,residual,energy,W_or_total");
}

TEST_CASE("simulate writes the trajectory and the report") {
  const auto out = scratch("simulate");
  const auto outcome = run_experiment(Command::simulate, avd_config(), out);
  REQUIRE(outcome.code == exit_code::success);
  const auto rows = lines(out / "trajectory.csv");
  CHECK(rows.size() == 101);
  CHECK(rows.front() == trajectory_csv_header(2));
  const auto report = read_json(out / "report.json");
  CHECK(report["status"] == "ok");
  CHECK(report["final_residual"].get<double>() < 1e-3);
  CHECK(report["assumption"]["pass"] == true);
}

TEST_CASE("operator certificate through the runner") {
  const auto out = scratch("certify");
  REQUIRE(run_experiment(Command::simulate, fogda_config(), out).code == exit_code::success);
  const auto report = read_json(out / "report.json");
  REQUIRE(report["certificates"].size() == 1);
  CHECK(report["certificates"][0]["pass"] == true);

  const auto cert_out = scratch("certify_only");
  REQUIRE(run_experiment(Command::certify, fogda_config(), cert_out).code == exit_code::success);
  CHECK_FALSE(fs::exists(cert_out / "trajectory.csv"));
  CHECK(read_json(cert_out / "report.json")["certificates"][0]["verdict"] == "small_o");
}

TEST_CASE("schema violations exit 2 and write nothing") {
  auto check_rejected = [](json doc, Command cmd = Command::simulate) {
    const auto out = scratch("rejected");
    CHECK(run_experiment(cmd, doc, out).code == exit_code::config);
    CHECK_FALSE(fs::exists(out));
  };
  auto doc = avd_config();
  doc["system"]["variant"] = "AVD_fucntion";
  check_rejected(doc);
  doc = avd_config();
  doc["outputs"]["samples"] = 1;
  check_rejected(doc);
  doc = avd_config();
  doc["system"]["horizon"] = 0.5;
  check_rejected(doc);
  doc = avd_config();
  doc["system"].erase("y0");
  check_rejected(doc);
  doc = avd_config();
  doc["system"]["alpha"] = 3;
  check_rejected(doc);
  doc = avd_config();
  doc["system"]["alpha"] = "four";
  check_rejected(doc);
  doc = avd_config();
  doc["system"]["problem"]["id"] = "rosenbrock";
  check_rejected(doc);
  doc = avd_config();
  doc["diagnostics"] = {{"certify", {{{"series", "operator_norm"}, {"exponent", 1}}}}};
  check_rejected(doc);
  check_rejected(avd_config(), Command::certify);
  check_rejected(json::array());
}

TEST_CASE("integration failure exits 3 with the last good time") {
  auto doc = avd_config();
  doc["integrator"] = {{"method", "dormand_prince"}, {"rtol", 1e-12}, {"max_steps", 10}};
  const auto out = scratch("failure");
  CHECK(run_experiment(Command::simulate, doc, out).code == exit_code::integration);
  const auto report = read_json(out / "report.json");
  CHECK(report["status"] == "integration_failure");
  CHECK(report["last_good_time"].get<double>() >= 1.0);
}

TEST_CASE("validate examples") {
  auto validate = [](const json& system) {
    const auto out = scratch("validate");
    const auto outcome = run_experiment(Command::validate, {{"system", system}}, out);
    REQUIRE(outcome.code == exit_code::success);
    return read_json(out / "report.json")["assumption"];
  };
  auto r = validate({{"variant", "HBF_function"}, {"lambda", 1}, {"b", {{"family", "exponential"}, {"rho", 0.5}}}});
  CHECK(r["pass"] == true);
  r = validate({{"variant", "HB_operator"}, {"mu", {{"family", "special_operator_case"}, {"alpha", 2}}}});
  CHECK(r["pass"] == false);
  CHECK(r["quantities"]["lambda_window_nonempty"] == 0.0);
  r = validate({{"variant", "HBF_function"}, {"lambda", 1}, {"start_time", 2},
                {"b", {{"family", "polynomial"}, {"rho", 1}}}});
  CHECK(r["pass"] == true);
  CHECK(r["quantities"]["sup_b_dot_over_b"].get<double>() == doctest::Approx(0.5));
  r = validate({{"variant", "FOGDA_operator"}, {"alpha", 4}, {"start_time", 1}});
  CHECK(r["pass"] == true);
}

TEST_CASE("compare in auto-twin mode") {
  const auto out = scratch("compare_auto");
  REQUIRE(run_experiment(Command::compare, avd_config(), out).code == exit_code::success);
  const auto report = read_json(out / "report.json");
  CHECK(report["max_deviation"].get<double>() <= 1e-5);
  CHECK(report["equivalence"]["n_samples"] == 200);
  const auto rows = lines(out / "equivalence.csv");
  CHECK(rows.front() == "s,t,deviation,velocity_deviation");
  CHECK(rows.size() == 201);

  auto op = fogda_config();
  op["system"]["horizon"] = 50;
  op.erase("diagnostics");
  const auto out2 = scratch("compare_op");
  REQUIRE(run_experiment(Command::compare, op, out2).code == exit_code::success);
  CHECK(read_json(out2 / "report.json")["max_deviation"].get<double>() <= 1e-5);
}

TEST_CASE("compare with an explicit Heavy Ball spec") {
  auto doc = avd_config();
  doc["system"]["y1"] = {3, 0};
  json heavy = {{"variant", "HBF_function"},
                {"problem", {{"id", "quadratic"}, {"dim", 2}}},
                {"lambda", 1},
                {"start_time", 0},
                {"b", {{"family", "special_function_case"}, {"alpha", 4}, {"s0", 1}, {"t0", 0}}},
                {"y0", {1, -1}},
                {"y1", {1, 0}}};
  doc["compare"] = {{"heavy", heavy}};
  const auto ok = scratch("compare_explicit");
  CHECK(run_experiment(Command::compare, doc, ok).code == exit_code::success);
  CHECK(read_json(ok / "report.json")["mode"] == "explicit");

  doc["compare"]["heavy"]["y1"] = {1.5, 0};
  const auto bad = scratch("compare_mismatch");
  CHECK(run_experiment(Command::compare, doc, bad).code == exit_code::mapping_mismatch);

  doc["compare"]["heavy"]["variant"] = "HB_operator";
  CHECK(run_experiment(Command::compare, doc, scratch("compare_wrong")).code == exit_code::config);
}

TEST_CASE("negative control through a perturbed map") {
  auto doc = avd_config();
  doc["compare"] = {{"map_alpha", 4.5}};
  const auto out = scratch("compare_negative");
  REQUIRE(run_experiment(Command::compare, doc, out).code == exit_code::success);
  CHECK(read_json(out / "report.json")["max_deviation"].get<double>() >= 1e-2);
}

TEST_CASE("seed override") {
  auto doc = avd_config();
  doc["system"]["problem"]["id"] = "least_squares";
  doc["seed"] = 1;
  const auto a = scratch("seed_a"), b = scratch("seed_b"), c = scratch("seed_c");
  REQUIRE(run_experiment(Command::simulate, doc, a).code == 0);
  REQUIRE(run_experiment(Command::simulate, doc, b, 2).code == 0);
  doc["seed"] = 2;
  REQUIRE(run_experiment(Command::simulate, doc, c).code == 0);
  CHECK(slurp(a / "trajectory.csv") != slurp(b / "trajectory.csv"));
  CHECK(slurp(b / "trajectory.csv") == slurp(c / "trajectory.csv"));
}

TEST_CASE("binary: exit codes and determinism") {
  const auto dir = scratch("binary");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "avd.json") << avd_config().dump();
    auto typo = avd_config();
    typo["system"]["variant"] = "AVDfunction";
    std::ofstream(dir / "typo.json") << typo.dump();
    std::ofstream(dir / "broken.json") << "{not json";
  }
  const std::string cfg = (dir / "avd.json").string();
  CHECK(run_binary("simulate --config " + cfg + " --out " + (dir / "r1").string()) == 0);
  CHECK(run_binary("simulate --config " + cfg + " --out " + (dir / "r2").string()) == 0);
  CHECK(slurp(dir / "r1" / "trajectory.csv") == slurp(dir / "r2" / "trajectory.csv"));
  CHECK(slurp(dir / "r1" / "report.json") == slurp(dir / "r2" / "report.json"));

  CHECK(run_binary("simulate --config " + (dir / "typo.json").string() + " --out " +
                   (dir / "typo_out").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "typo_out"));
  CHECK(run_binary("simulate --config " + (dir / "broken.json").string()) == 2);
  CHECK(run_binary("simulate --config " + (dir / "missing.json").string()) == 2);
  CHECK(run_binary("simulate") == 2);
  CHECK(run_binary("frobnicate --config " + cfg) == 2);
  CHECK(run_binary("compare --config " + cfg + " --out " + (dir / "cmp").string() + " --seed 5") == 0);
  CHECK(fs::exists(dir / "cmp" / "equivalence.csv"));
}
