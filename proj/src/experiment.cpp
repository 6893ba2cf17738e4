#include "inertial/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace inertial {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Command command) {
  switch (command) {
    case Command::simulate: return "simulate";
    case Command::compare: return "compare";
    case Command::validate: return "validate";
    case Command::certify: return "certify";
  }
  return "simulate";
}

Command command_from_string(const std::string& name) {
  if (name == "simulate") return Command::simulate;
  if (name == "compare") return Command::compare;
  if (name == "validate") return Command::validate;
  if (name == "certify") return Command::certify;
  throw ConfigError("unknown command '" + name + "'");
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string trajectory_csv_header(int dim) {
  std::string h = "t";
  for (const char* prefix : {"p_", "u_", "v_"}) {
    for (int i = 0; i < dim; ++i) h += "," + std::string(prefix) + std::to_string(i);
  }
  h += ",residual,energy,W_or_total";
  return h;
}

namespace {

// ---------------------------------------------------------------- parsing

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(where + ": missing '" + key + "'");
  }
  return obj.at(key);
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return number(obj, key, where);
}

std::string text(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw ConfigError(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

Vector vector_of(const json& obj, const char* key, int dim, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_array() || static_cast<int>(v.size()) != dim) {
    throw ConfigError(where + ": '" + key + "' must be an array of length " +
                      std::to_string(dim));
  }
  Vector out(dim);
  for (int i = 0; i < dim; ++i) {
    if (!v[i].is_number()) throw ConfigError(where + ": '" + key + "' must hold numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

template <typename F>
auto guarded(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Scaling parse_scaling(const json& obj, const json& system, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": scaling must be an object");
  const std::string family = text(obj, "family", where);
  const double sys_alpha = number_or(system, "alpha", std::numeric_limits<double>::quiet_NaN(), where);
  const double sys_lambda = number_or(system, "lambda", std::numeric_limits<double>::quiet_NaN(), where);
  const double sys_t0 = number_or(system, "start_time", 0.0, where);
  return guarded(where, [&] {
    switch (scaling_family_from_string(family)) {
      case ScalingFamily::exponential:
        return Scaling::exponential(number_or(obj, "kappa", 1.0, where), number(obj, "rho", where));
      case ScalingFamily::polynomial:
        return Scaling::polynomial(number_or(obj, "kappa", 1.0, where), number(obj, "rho", where));
      case ScalingFamily::constant:
        return Scaling::constant(number_or(obj, "kappa", 1.0, where));
      case ScalingFamily::special_function_case:
        return Scaling::special_function_case(
            number_or(obj, "alpha", sys_alpha, where), number_or(obj, "lambda", sys_lambda, where),
            number_or(obj, "s0", 1.0, where), number_or(obj, "t0", sys_t0, where));
      case ScalingFamily::special_operator_case:
        return Scaling::special_operator_case(number_or(obj, "alpha", sys_alpha, where),
                                              number_or(obj, "s0", 1.0, where),
                                              number_or(obj, "t0", sys_t0, where));
      case ScalingFamily::custom:
        break;
    }
    throw ConfigError(where + ": family '" + family + "' is not configurable");
  });
}

std::optional<double> operator_lambda_default(const json& system, const std::string& where) {
  if (system.contains("lambda")) return number(system, "lambda", where);
  if (system.contains("mu") && system.at("mu").is_object() &&
      system.at("mu").value("family", "") == "special_operator_case") {
    const double alpha =
        number_or(system.at("mu"), "alpha", number_or(system, "alpha", 0.0, where), where);
    if (alpha > 0.0) return 2.0 * (alpha - 1.0) / alpha;
  }
  return std::nullopt;
}

SystemConfig parse_system(const json& system, bool need_problem, std::uint64_t seed,
                          const std::string& where) {
  if (!system.is_object()) throw ConfigError(where + " must be an object");
  SystemConfig cfg;
  cfg.raw = system;
  cfg.variant = guarded(where, [&] { return variant_from_string(text(system, "variant", where)); });
  const double start = number_or(system, "start_time",
                                 is_heavy_ball(cfg.variant) ? 0.0 : 1.0, where);
  cfg.horizon = number_or(system, "horizon", start + 100.0, where);
  if (!(cfg.horizon > start)) throw ConfigError(where + ": horizon must exceed start_time");
  if (!need_problem) return cfg;

  const json& problem = require(system, "problem", where);
  const std::string pid = text(problem, "id", where + ".problem");
  const int dim = static_cast<int>(number(problem, "dim", where + ".problem"));
  const json params = problem.contains("params") ? problem.at("params") : json::object();

  const Vector y0 = vector_of(system, "y0", dim, where);
  const Vector y1 = system.contains("y1") ? vector_of(system, "y1", dim, where) : Vector::Zero(dim);

  cfg.spec = guarded(where, [&]() -> SystemSpec {
    switch (cfg.variant) {
      case Variant::HBF_function: {
        auto f = std::make_shared<const ScalarProblem>(build_scalar_problem(pid, dim, params, seed));
        return SystemSpec::hbf(f, number(system, "lambda", where),
                               parse_scaling(require(system, "b", where), system, where + ".b"),
                               start, y0, y1);
      }
      case Variant::AVD_function: {
        auto f = std::make_shared<const ScalarProblem>(build_scalar_problem(pid, dim, params, seed));
        return SystemSpec::avd(f, number(system, "alpha", where), start, y0, y1);
      }
      case Variant::HB_operator: {
        auto v = std::make_shared<const OperatorProblem>(build_operator_problem(pid, dim, params, seed));
        const Scaling mu = parse_scaling(require(system, "mu", where), system, where + ".mu");
        const Scaling gamma = system.contains("gamma")
                                  ? parse_scaling(system.at("gamma"), system, where + ".gamma")
                                  : mu;
        const auto lambda = operator_lambda_default(system, where);
        if (!lambda) throw ConfigError(where + ": missing 'lambda'");
        return SystemSpec::hb_operator(v, *lambda, mu, gamma, start, y0, y1);
      }
      case Variant::FOGDA_operator: {
        auto v = std::make_shared<const OperatorProblem>(build_operator_problem(pid, dim, params, seed));
        return SystemSpec::fogda(v, number(system, "alpha", where), start, y0, y1);
      }
    }
    throw ConfigError(where + ": unknown variant");
  });
  return cfg;
}

IntegratorControls parse_integrator(const json& doc) {
  IntegratorControls controls;
  if (!doc.contains("integrator")) return controls;
  const json& obj = doc.at("integrator");
  const std::string where = "integrator";
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  const std::string method = obj.value("method", "dormand_prince");
  if (method == "dormand_prince") {
    DormandPrince dp;
    dp.rtol = number_or(obj, "rtol", dp.rtol, where);
    dp.atol = number_or(obj, "atol", dp.atol, where);
    dp.h_init = number_or(obj, "h_init", dp.h_init, where);
    dp.h_max = number_or(obj, "h_max", dp.h_max, where);
    if (!(dp.rtol > 0 && dp.atol > 0 && dp.h_init > 0 && dp.h_max > 0)) {
      throw ConfigError(where + ": rtol, atol, h_init, h_max must be positive");
    }
    controls.method = dp;
  } else if (method == "rk4_fixed") {
    Rk4Fixed rk{number(obj, "h", where)};
    if (!(rk.h > 0)) throw ConfigError(where + ": h must be positive");
    controls.method = rk;
  } else {
    throw ConfigError(where + ": unknown method '" + method + "'");
  }
  controls.max_steps = static_cast<long>(number_or(obj, "max_steps", double(controls.max_steps), where));
  if (controls.max_steps <= 0) throw ConfigError(where + ": max_steps must be positive");
  return controls;
}

bool series_known(Variant variant, const std::string& name) {
  if (is_function_variant(variant)) return name == "f_gap" || name == "velocity_norm";
  return name == "operator_norm" || name == "inner_product" || name == "velocity_norm";
}

}  // namespace

ExperimentConfig parse_config(Command command, const json& doc,
                              std::optional<std::uint64_t> seed_override) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.command = command;
  if (doc.contains("command") && text(doc, "command", "config") != to_string(command)) {
    throw ConfigError("config command '" + doc.at("command").get<std::string>() +
                      "' does not match subcommand '" + to_string(command) + "'");
  }
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_integer()) throw ConfigError("seed must be an integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (seed_override) cfg.seed = *seed_override;

  cfg.integrator = parse_integrator(doc);

  if (doc.contains("outputs")) {
    const json& out = doc.at("outputs");
    cfg.samples = static_cast<int>(number_or(out, "samples", cfg.samples, "outputs"));
  }
  if (cfg.samples < 2) throw ConfigError("outputs: samples must be >= 2");

  const bool need_problem = command != Command::validate;
  cfg.system = parse_system(require(doc, "system", "config"), need_problem, cfg.seed, "system");

  if (doc.contains("diagnostics")) {
    const json& diag = doc.at("diagnostics");
    if (diag.contains("eta")) cfg.eta = number(diag, "eta", "diagnostics");
    if (diag.contains("certify")) {
      const json& list = diag.at("certify");
      if (!list.is_array()) throw ConfigError("diagnostics.certify must be an array");
      for (const json& item : list) {
        CertifyRequest req;
        req.series = text(item, "series", "diagnostics.certify");
        req.exponent = number(item, "exponent", "diagnostics.certify");
        req.window_start = number_or(item, "window_start", 1.0, "diagnostics.certify");
        if (!series_known(cfg.system.variant, req.series)) {
          throw ConfigError("diagnostics.certify: unknown series '" + req.series + "' for " +
                            to_string(cfg.system.variant));
        }
        if (!(req.window_start > 0.0) || cfg.system.horizon < 100.0 * req.window_start) {
          throw ConfigError("diagnostics.certify: horizon must cover two decades after window_start");
        }
        cfg.certify.push_back(req);
      }
    }
  }
  if (command == Command::certify && cfg.certify.empty()) {
    throw ConfigError("certify: diagnostics.certify must list at least one series");
  }

  if (command == Command::compare) {
    if (is_heavy_ball(cfg.system.variant)) {
      throw ConfigError("compare: 'system' must be a vanishing-damping variant");
    }
    const json cmp = doc.contains("compare") ? doc.at("compare") : json::object();
    cfg.compare_samples = static_cast<int>(number_or(cmp, "n_samples", cfg.compare_samples, "compare"));
    if (cfg.compare_samples < 2) throw ConfigError("compare: n_samples must be >= 2");
    cfg.twin_lambda = number_or(cmp, "lambda", number_or(doc.at("system"), "lambda", 1.0, "system"),
                                "compare");
    cfg.twin_t0 = number_or(cmp, "t0", 0.0, "compare");
    if (cmp.contains("map_alpha")) cfg.map_alpha = number(cmp, "map_alpha", "compare");
    if (cmp.contains("heavy")) {
      cfg.heavy = parse_system(cmp.at("heavy"), true, cfg.seed, "compare.heavy");
      const Variant expected = cfg.system.variant == Variant::AVD_function ? Variant::HBF_function
                                                                           : Variant::HB_operator;
      if (cfg.heavy->variant != expected) {
        throw ConfigError("compare.heavy: expected variant " + to_string(expected));
      }
    }
  }
  return cfg;
}

// ---------------------------------------------------------------- output

json to_json(const AssumptionReport& report) {
  json j;
  j["pass"] = report.pass;
  j["outcome"] = to_string(report.outcome);
  j["quantities"] = report.quantities;
  j["violated"] = report.violated;
  j["sampled"] = report.sampled;
  return j;
}

json to_json(const RateCertificate& cert) {
  json j;
  j["exponent"] = cert.exponent;
  j["pass"] = cert.pass;
  j["verdict"] = to_string(cert.verdict);
  j["nonincreasing"] = cert.nonincreasing;
  j["strict_decay"] = cert.strict_decay;
  j["slack"] = cert.slack;
  json maxima = json::array();
  for (const auto& w : cert.decade_maxima) maxima.push_back({w.start, w.max});
  j["decade_maxima"] = maxima;
  return j;
}

json to_json(const EquivalenceReport& report) {
  json j;
  j["max_deviation"] = report.max_deviation;
  j["velocity_max_deviation"] = report.velocity_max_deviation;
  j["n_samples"] = report.sample_times.size();
  j["sample_first"] = report.sample_times.empty() ? 0.0 : report.sample_times.front();
  j["sample_last"] = report.sample_times.empty() ? 0.0 : report.sample_times.back();
  return j;
}

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
}

std::vector<double> uniform_grid(double a, double b, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = a + (b - a) * double(i) / double(n - 1);
  g.back() = b;
  return g;
}

// Assumption check for the configured system; vanishing-damping systems are
// checked through their Heavy Ball twin.
AssumptionReport assumption_for(const SystemConfig& sys, double twin_lambda, double twin_t0) {
  const json& raw = sys.raw;
  const std::string where = "system";
  const double start = number_or(raw, "start_time", is_heavy_ball(sys.variant) ? 0.0 : 1.0, where);
  return guarded(where, [&]() -> AssumptionReport {
    switch (sys.variant) {
      case Variant::HBF_function:
        return validate_assumption_function(number(raw, "lambda", where),
                                            parse_scaling(require(raw, "b", where), raw, "system.b"),
                                            start, sys.horizon);
      case Variant::HB_operator: {
        const Scaling mu = parse_scaling(require(raw, "mu", where), raw, "system.mu");
        const Scaling gamma = raw.contains("gamma") ? parse_scaling(raw.at("gamma"), raw, "system.gamma") : mu;
        const auto lambda = operator_lambda_default(raw, where);
        if (!lambda) throw ConfigError(where + ": missing 'lambda'");
        return validate_assumption_operator(*lambda, mu, gamma, start, sys.horizon);
      }
      case Variant::AVD_function: {
        const double alpha = number(raw, "alpha", where);
        const TimeMap map = TimeMap::function_case(alpha, twin_lambda, start, twin_t0);
        return validate_assumption_function(
            twin_lambda, Scaling::special_function_case(alpha, twin_lambda, start, twin_t0),
            twin_t0, map.tau(sys.horizon));
      }
      case Variant::FOGDA_operator: {
        const double alpha = number(raw, "alpha", where);
        const TimeMap map = TimeMap::operator_case(alpha, start, twin_t0);
        const Scaling mu = Scaling::special_operator_case(alpha, start, twin_t0);
        return validate_assumption_operator(map.lambda(), mu, mu, twin_t0, map.tau(sys.horizon));
      }
    }
    throw ConfigError("unknown variant");
  });
}

struct SampleDiagnostics {
  double residual = 0.0;
  double energy = 0.0;
  double w_or_total = 0.0;
};

// Evaluates the per-row diagnostics of trajectory.csv.  Vanishing-damping
// rows use the Heavy Ball twin's energies at t = tau(s).
class RowEvaluator {
 public:
  RowEvaluator(const ExperimentConfig& cfg, const SystemSpec& spec)
      : spec_(spec), lambda_(cfg.twin_lambda), t0_(cfg.twin_t0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    eta_ = nan;
    switch (spec.variant) {
      case Variant::HBF_function:
        eta_ = cfg.eta.value_or(default_eta(spec, cfg.system.horizon));
        break;
      case Variant::AVD_function: {
        map_ = TimeMap::function_case(spec.alpha, lambda_, spec.start_time, t0_);
        twin_scaling_ = Scaling::special_function_case(spec.alpha, lambda_, spec.start_time, t0_);
        eta_ = cfg.eta.value_or(0.5 * (2.0 * lambda_ / (spec.alpha - 1.0) + lambda_));
        break;
      }
      case Variant::HB_operator:
        eta_ = cfg.eta.value_or(default_operator_eta(spec, cfg.system.horizon));
        break;
      case Variant::FOGDA_operator: {
        map_ = TimeMap::operator_case(spec.alpha, spec.start_time, t0_);
        lambda_ = map_->lambda();
        twin_scaling_ = Scaling::special_operator_case(spec.alpha, spec.start_time, t0_);
        eta_ = cfg.eta.value_or(0.5 * (lambda_ + 1.0));
        break;
      }
    }
    if (is_function_variant(spec.variant)) {
      if (spec.function->minimizer) anchor_ = *spec.function->minimizer;
    } else if (spec.op->zero) {
      anchor_ = *spec.op->zero;
    }
  }

  SampleDiagnostics operator()(double t, const Vector& p, const Vector& v) const {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    SampleDiagnostics d;
    if (is_function_variant(spec_.variant)) {
      const double gap = spec_.function->value(p) - spec_.function->inf_value;
      d.residual = gap;
      double b = 0.0, lambda = lambda_;
      Vector ydot = v;
      if (spec_.variant == Variant::HBF_function) {
        b = spec_.b->value(t);
        lambda = spec_.lambda;
      } else {
        const double th = map_->tau(t);
        b = twin_scaling_->value(th);
        ydot = v / map_->tau_dot(t);
      }
      d.energy = anchor_ ? energy_function_at(b, gap, p, ydot, *anchor_, eta_, lambda) : nan;
      d.w_or_total = lyapunov_W_at(b, gap, ydot);
      return d;
    }
    const Vector vp = spec_.op->apply(p);
    d.residual = vp.norm();
    double mu = 0.0, lambda = lambda_;
    Vector ydot = v;
    if (spec_.variant == Variant::HB_operator) {
      mu = spec_.mu->value(t);
      lambda = spec_.lambda;
    } else {
      mu = twin_scaling_->value(map_->tau(t));
      ydot = v / map_->tau_dot(t);
    }
    if (anchor_) {
      const auto parts = energy_operator_at(mu, p, ydot, vp, *anchor_, eta_, lambda);
      d.energy = parts[0] + parts[1] + parts[2] + parts[3];
    } else {
      d.energy = nan;
    }
    d.w_or_total = d.energy;
    return d;
  }

  double eta() const { return eta_; }

 private:
  const SystemSpec& spec_;
  double lambda_;
  double t0_;
  double eta_;
  std::optional<TimeMap> map_;
  std::optional<Scaling> twin_scaling_;
  std::optional<Vector> anchor_;
};

std::string trajectory_csv(const ExperimentConfig& cfg, const Run& run) {
  const SystemSpec& spec = *run.spec;
  const int dim = spec.dim();
  const RowEvaluator rows(cfg, spec);
  std::string out = trajectory_csv_header(dim) + "\n";
  for (const auto& sample : run.trajectory.samples) {
    const State<double> st = unstack(sample.t, sample.z);
    const Vector v = velocity(spec, sample.t, st.p, st.u);
    const SampleDiagnostics d = rows(sample.t, st.p, v);
    out += format_number(sample.t);
    for (const Vector* block : {&st.p, &st.u, &v}) {
      for (int i = 0; i < dim; ++i) out += "," + format_number((*block)[i]);
    }
    out += "," + format_number(d.residual) + "," + format_number(d.energy) + "," +
           format_number(d.w_or_total) + "\n";
  }
  return out;
}

json base_report(const ExperimentConfig& cfg) {
  json j;
  j["command"] = to_string(cfg.command);
  j["variant"] = to_string(cfg.system.variant);
  j["seed"] = cfg.seed;
  return j;
}

Outcome integration_failure(const ExperimentConfig& cfg, const fs::path& out_dir,
                            const IntegrationError& e) {
  json j = base_report(cfg);
  j["status"] = "integration_failure";
  j["message"] = e.what();
  j["last_good_time"] = e.last_good_time();
  write_json(out_dir / "report.json", j);
  return {exit_code::integration, e.what()};
}

Outcome simulate_impl(const ExperimentConfig& cfg, const fs::path& out_dir, bool write_csv) {
  const SystemSpec& spec = *cfg.system.spec;
  IntegratorControls controls = cfg.integrator;
  if (write_csv) controls.sample_times = uniform_grid(spec.start_time, cfg.system.horizon, cfg.samples);
  const AssumptionReport assumption = assumption_for(cfg.system, cfg.twin_lambda, cfg.twin_t0);

  prepare_dir(out_dir);
  Run run;
  try {
    run = simulate(spec, cfg.system.horizon, controls);
  } catch (const IntegrationError& e) {
    return integration_failure(cfg, out_dir, e);
  }

  const auto residuals = residual_series(run);
  const std::string residual_name = is_function_variant(spec.variant) ? "f_gap" : "operator_norm";

  json j = base_report(cfg);
  j["status"] = "ok";
  j["dim"] = spec.dim();
  j["start_time"] = run.trajectory.start_time();
  j["end_time"] = run.trajectory.end_time();
  j["nodes"] = run.trajectory.nodes.size();
  j["accepted_steps"] = run.trajectory.stats.accepted;
  j["rejected_steps"] = run.trajectory.stats.rejected;
  j["field_evaluations"] = run.trajectory.stats.evaluations;
  j["final_residual"] = residuals.at(residual_name).values.back();
  j["assumption"] = to_json(assumption);
  json certs = json::array();
  for (const auto& req : cfg.certify) {
    json c = to_json(certify_rate(residuals.at(req.series), req.exponent, req.window_start));
    c["series"] = req.series;
    c["window_start"] = req.window_start;
    certs.push_back(c);
  }
  j["certificates"] = certs;

  if (write_csv) write_text(out_dir / "trajectory.csv", trajectory_csv(cfg, run));
  write_json(out_dir / "report.json", j);
  return {exit_code::success, "ok"};
}

}  // namespace

Outcome run_simulate(const ExperimentConfig& config, const fs::path& out_dir) {
  return simulate_impl(config, out_dir, true);
}

Outcome run_certify(const ExperimentConfig& config, const fs::path& out_dir) {
  return simulate_impl(config, out_dir, false);
}

Outcome run_validate(const ExperimentConfig& config, const fs::path& out_dir) {
  const AssumptionReport report = assumption_for(config.system, config.twin_lambda, config.twin_t0);
  json j = base_report(config);
  j["status"] = "ok";
  j["assumption"] = to_json(report);
  prepare_dir(out_dir);
  write_json(out_dir / "report.json", j);
  return {exit_code::success, to_string(report.outcome)};
}

Outcome run_compare(const ExperimentConfig& config, const fs::path& out_dir) {
  const SystemSpec& vanishing = *config.system.spec;
  SystemSpec heavy;
  TimeMap map = TimeMap::identity();
  json j = base_report(config);

  if (config.heavy) {
    heavy = *config.heavy->spec;
    map = guarded("compare", [&] {
      return vanishing.variant == Variant::AVD_function
                 ? TimeMap::function_case(vanishing.alpha, heavy.lambda, vanishing.start_time,
                                          heavy.start_time)
                 : TimeMap::operator_case(vanishing.alpha, vanishing.start_time, heavy.start_time);
    });
    const auto [y0, y1] = map_initial_conditions(map, MapDirection::vanishing_to_heavy,
                                                 vanishing.y0, vanishing.y1);
    const double pos_gap = (heavy.y0 - y0).norm();
    const double vel_gap = (heavy.y1 - y1).norm();
    const double tol = 1e-12;
    if (pos_gap > tol * (1.0 + y0.norm()) || vel_gap > tol * (1.0 + y1.norm())) {
      prepare_dir(out_dir);
      j["status"] = "mapping_mismatch";
      j["position_mismatch"] = pos_gap;
      j["velocity_mismatch"] = vel_gap;
      write_json(out_dir / "report.json", j);
      return {exit_code::mapping_mismatch, "initial conditions do not match the time map"};
    }
    j["mode"] = "explicit";
  } else {
    heavy = guarded("compare", [&] { return heavy_twin(vanishing, config.twin_lambda, config.twin_t0); });
    map = twin_map(vanishing, config.twin_lambda, config.twin_t0);
    j["mode"] = "auto_twin";
  }

  TimeMap comparison = map;
  if (config.map_alpha) {
    comparison = guarded("compare", [&] {
      return map.map_case() == MapCase::function_case
                 ? TimeMap::function_case(*config.map_alpha, map.lambda(), map.s0(), map.t0())
                 : TimeMap::operator_case(*config.map_alpha, map.s0(), map.t0());
    });
  }

  const double s_end = config.system.horizon;
  const double t_end = map.tau(s_end);
  prepare_dir(out_dir);
  Run vanishing_run, heavy_run;
  try {
    vanishing_run = simulate(vanishing, s_end, config.integrator);
    heavy_run = simulate(heavy, t_end, config.integrator);
  } catch (const IntegrationError& e) {
    return integration_failure(config, out_dir, e);
  }

  EquivalenceReport report;
  try {
    report = equivalence_check(heavy_run, vanishing_run, comparison, config.compare_samples);
  } catch (const RangeError& e) {
    throw ConfigError(std::string("compare: ") + e.what());
  }

  j["status"] = "ok";
  j["equivalence"] = to_json(report);
  j["max_deviation"] = report.max_deviation;
  j["velocity_max_deviation"] = report.velocity_max_deviation;
  j["heavy_horizon"] = t_end;
  j["vanishing_horizon"] = s_end;
  j["map"] = {{"case", map.map_case() == MapCase::function_case ? "function_case" : "operator_case"},
              {"alpha", comparison.alpha()},
              {"lambda", map.lambda()},
              {"s0", map.s0()},
              {"t0", map.t0()}};

  std::string csv = "s,t,deviation,velocity_deviation\n";
  for (std::size_t i = 0; i < report.sample_times.size(); ++i) {
    const double s = report.sample_times[i];
    csv += format_number(s) + "," + format_number(comparison.tau(s)) + "," +
           format_number(report.deviations[i]) + "," +
           format_number(report.velocity_deviations[i]) + "\n";
  }
  write_text(out_dir / "equivalence.csv", csv);
  write_json(out_dir / "report.json", j);
  return {exit_code::success, "ok"};
}

Outcome run_experiment(Command command, const json& doc, const fs::path& out_dir,
                       std::optional<std::uint64_t> seed_override) {
  try {
    const ExperimentConfig cfg = parse_config(command, doc, seed_override);
    switch (command) {
      case Command::simulate: return run_simulate(cfg, out_dir);
      case Command::compare: return run_compare(cfg, out_dir);
      case Command::validate: return run_validate(cfg, out_dir);
      case Command::certify: return run_certify(cfg, out_dir);
    }
  } catch (const ConfigError& e) {
    return {exit_code::config, e.what()};
  } catch (const DomainError& e) {
    return {exit_code::config, e.what()};
  } catch (const json::exception& e) {
    return {exit_code::config, e.what()};
  } catch (const InsufficientData& e) {
    return {exit_code::config, e.what()};
  }
  return {exit_code::config, "unknown command"};
}

}  // namespace inertial
