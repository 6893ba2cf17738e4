#include "inertial/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace inertial {

namespace {

const Vector& require_anchor(const Vector& anchor, int dim) {
  if (anchor.size() != dim) {
    throw DomainError("energy: anchor has dimension " + std::to_string(anchor.size()) +
                      ", expected " + std::to_string(dim));
  }
  return anchor;
}

void require_run_variant(const Run& run, Variant variant, const char* who) {
  if (run.spec->variant != variant) {
    throw DomainError(std::string(who) + ": expected a " + to_string(variant) +
                      " trajectory, got " + to_string(run.spec->variant));
  }
}

void require_eta(double eta, double lambda) {
  if (eta < 0.0 || eta > lambda) {
    throw DomainError("energy: eta = " + std::to_string(eta) + " must lie in [0, lambda]");
  }
}

}  // namespace

double energy_function_at(double b, double f_gap, const Vector& y, const Vector& ydot,
                          const Vector& anchor, double eta, double lambda) {
  const Vector d = y - anchor;
  return b * f_gap + 0.5 * (eta * d + ydot).squaredNorm() +
         0.5 * eta * (lambda - eta) * d.squaredNorm();
}

double lyapunov_W_at(double b, double f_gap, const Vector& ydot) {
  return f_gap + ydot.squaredNorm() / (2.0 * b);
}

std::array<double, 4> energy_operator_at(double mu, const Vector& y, const Vector& ydot,
                                         const Vector& vy, const Vector& anchor, double eta,
                                         double lambda) {
  const Vector d = y - anchor;
  return {0.5 * (2.0 * eta * d + 2.0 * ydot + mu * vy).squaredNorm(),
          2.0 * eta * (lambda - eta) * d.squaredNorm(),
          2.0 * eta * mu * d.dot(vy),
          0.5 * mu * mu * vy.squaredNorm()};
}

double default_eta(const SystemSpec& spec, double horizon) {
  if (spec.variant != Variant::HBF_function) {
    throw DomainError("default_eta: expected an HBF_function spec");
  }
  const double sup = log_derivative_bounds(*spec.b, spec.start_time, horizon).sup;
  return std::clamp(0.5 * (sup + spec.lambda), 0.0, spec.lambda);
}

double default_operator_eta(const SystemSpec& spec, double horizon) {
  if (spec.variant != Variant::HB_operator) {
    throw DomainError("default_operator_eta: expected an HB_operator spec");
  }
  const auto report = validate_assumption_operator(spec.lambda, *spec.mu, *spec.gamma,
                                                   spec.start_time, horizon);
  const auto it = report.quantities.find("L");
  if (it == report.quantities.end() || !std::isfinite(it->second)) {
    throw DomainError("default_operator_eta: lim gamma/mu is not available");
  }
  return 0.5 * (spec.lambda + it->second);
}

Series energy_function_case(const Run& run, const EnergyParams& params) {
  require_run_variant(run, Variant::HBF_function, "energy_function_case");
  const SystemSpec& spec = *run.spec;
  require_eta(params.eta, spec.lambda);
  const Vector& anchor = require_anchor(params.anchor, spec.dim());
  Series out;
  for (std::size_t i = 0; i < run.trajectory.nodes.size(); ++i) {
    const auto st = run.node_state(i);
    const Vector ydot = velocity(spec, st.time, st.p, st.u);
    const double gap = spec.function->value(st.p) - spec.function->inf_value;
    out.push_back(st.time, energy_function_at(spec.b->value(st.time), gap, st.p, ydot, anchor,
                                              params.eta, spec.lambda));
  }
  return out;
}

Series lyapunov_W(const Run& run) {
  require_run_variant(run, Variant::HBF_function, "lyapunov_W");
  const SystemSpec& spec = *run.spec;
  Series out;
  for (std::size_t i = 0; i < run.trajectory.nodes.size(); ++i) {
    const auto st = run.node_state(i);
    const Vector ydot = velocity(spec, st.time, st.p, st.u);
    const double gap = spec.function->value(st.p) - spec.function->inf_value;
    out.push_back(st.time, lyapunov_W_at(spec.b->value(st.time), gap, ydot));
  }
  return out;
}

OperatorEnergy energy_operator_case(const Run& run, const EnergyParams& params) {
  require_run_variant(run, Variant::HB_operator, "energy_operator_case");
  const SystemSpec& spec = *run.spec;
  require_eta(params.eta, spec.lambda);
  const Vector& anchor = require_anchor(params.anchor, spec.dim());
  OperatorEnergy out;
  for (std::size_t i = 0; i < run.trajectory.nodes.size(); ++i) {
    const auto st = run.node_state(i);
    const Vector vy = spec.op->apply(st.p);
    const Vector ydot = velocity(spec, st.time, st.p, st.u);
    const auto parts = energy_operator_at(spec.mu->value(st.time), st.p, ydot, vy, anchor,
                                          params.eta, spec.lambda);
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
      out.components[k].push_back(st.time, parts[k]);
      total += parts[k];
    }
    out.total.push_back(st.time, total);
  }
  return out;
}

Discriminant parabola_discriminant(double t, double lambda, const Scaling& mu,
                                   const Scaling& gamma) {
  const double ratio = gamma.value(t) / mu.value(t);
  const double growth = mu.log_derivative(t);
  const double outer = lambda - ratio;
  const double inner = lambda - 2.0 * ratio + growth;
  Discriminant d;
  d.delta = 4.0 * (outer * outer - inner * inner);
  if (d.delta > 0.0) {
    const double root = 0.25 * std::sqrt(d.delta);
    d.roots = std::make_pair(0.5 * outer - root, 0.5 * outer + root);
  }
  return d;
}

std::string to_string(FormSign sign) {
  switch (sign) {
    case FormSign::nonnegative_form: return "nonnegative_form";
    case FormSign::nonpositive_form: return "nonpositive_form";
    case FormSign::indefinite: return "indefinite";
  }
  return "indefinite";
}

FormClassification quadratic_form_sign(double A, double B, double C) {
  if (A == 0.0) return {FormSign::indefinite, true};
  if (B * B - A * C > 0.0) return {FormSign::indefinite, false};
  return {A > 0.0 ? FormSign::nonnegative_form : FormSign::nonpositive_form, false};
}

std::map<std::string, Series> residual_series(const Run& run) {
  const SystemSpec& spec = *run.spec;
  std::map<std::string, Series> out;
  const auto& nodes = run.trajectory.nodes;
  if (is_function_variant(spec.variant)) {
    auto& gap = out["f_gap"];
    auto& vel = out["velocity_norm"];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto st = run.node_state(i);
      gap.push_back(st.time, spec.function->value(st.p) - spec.function->inf_value);
      vel.push_back(st.time, velocity(spec, st.time, st.p, st.u).norm());
    }
    return out;
  }
  if (!spec.op->zero) {
    throw DomainError("residual_series: operator has no known zero for the inner product");
  }
  const Vector& zero = *spec.op->zero;
  auto& norm = out["operator_norm"];
  auto& inner = out["inner_product"];
  auto& vel = out["velocity_norm"];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto st = run.node_state(i);
    const Vector vp = spec.op->apply(st.p);
    norm.push_back(st.time, vp.norm());
    inner.push_back(st.time, (st.p - zero).dot(vp));
    vel.push_back(st.time, velocity(spec, st.time, st.p, st.u).norm());
  }
  return out;
}

std::string to_string(RateVerdict verdict) {
  switch (verdict) {
    case RateVerdict::small_o: return "small_o";
    case RateVerdict::boundary_O: return "boundary_O";
    case RateVerdict::fail: return "fail";
  }
  return "fail";
}

RateCertificate certify_weighted(const Series& series,
                                 const std::function<double(double)>& weight,
                                 const std::vector<double>& window_edges,
                                 double exponent_label) {
  if (window_edges.size() < 3) {
    throw InsufficientData("certify: need at least two windows");
  }
  RateCertificate cert;
  cert.exponent = exponent_label;
  const std::size_t windows = window_edges.size() - 1;
  for (std::size_t w = 0; w < windows; ++w) {
    const double lo = window_edges[w];
    const double hi = window_edges[w + 1];
    const bool last = w + 1 == windows;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < series.size(); ++i) {
      const double t = series.times[i];
      if (t < lo || t > hi || (!last && t == hi)) continue;
      best = std::max(best, weight(t) * series.values[i]);
    }
    if (!std::isfinite(best)) {
      throw InsufficientData("certify: window [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + ") holds no samples");
    }
    cert.decade_maxima.push_back({lo, best});
  }

  double worst_growth = -std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w + 1 < cert.decade_maxima.size(); ++w) {
    const double a = cert.decade_maxima[w].max;
    const double b = cert.decade_maxima[w + 1].max;
    double growth;
    if (a > 0.0) {
      growth = b / a - 1.0;
    } else {
      growth = b <= a ? 0.0 : std::numeric_limits<double>::infinity();
    }
    worst_growth = std::max(worst_growth, growth);
  }
  cert.slack = worst_growth;
  cert.nonincreasing = worst_growth <= kRateSlack;
  cert.strict_decay =
      cert.decade_maxima.back().max < kStrictDecayFactor * cert.decade_maxima.front().max;
  cert.pass = cert.nonincreasing && cert.strict_decay;
  cert.verdict = cert.pass ? RateVerdict::small_o
                           : (cert.nonincreasing ? RateVerdict::boundary_O : RateVerdict::fail);
  return cert;
}

RateCertificate certify_rate(const Series& series, double exponent, double window_start) {
  if (series.size() == 0) throw InsufficientData("certify_rate: empty series");
  if (!(window_start > 0.0)) throw DomainError("certify_rate: window_start must be positive");
  const double t_last = series.times.back();
  const int decades =
      t_last > window_start ? static_cast<int>(std::floor(std::log10(t_last / window_start) + 1e-9))
                            : 0;
  if (decades < 2) {
    throw InsufficientData("certify_rate: need two full decades after " +
                           std::to_string(window_start) + ", series ends at " +
                           std::to_string(t_last));
  }
  std::vector<double> edges;
  for (int k = 0; k <= decades; ++k) edges.push_back(window_start * std::pow(10.0, k));
  edges.back() = std::max(edges.back(), std::min(t_last, edges.back() * (1.0 + 1e-9)));
  return certify_weighted(
      series, [exponent](double t) { return std::pow(t, exponent); }, edges, exponent);
}

Series tail_stabilization(const Run& run, const std::vector<double>& checkpoints) {
  const auto& nodes = run.trajectory.nodes;
  const Eigen::Index d = run.dim();
  const Vector last = nodes.back().z.head(d);
  Series out;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (i > 0 && !(checkpoints[i] > checkpoints[i - 1])) {
      throw DomainError("tail_stabilization: checkpoints must be ascending");
    }
    const Vector p = dense_eval(run.trajectory, checkpoints[i]).head(d);
    out.push_back(checkpoints[i], (p - last).norm());
  }
  return out;
}

double trajectory_extent(const Run& run) {
  const auto& nodes = run.trajectory.nodes;
  const Eigen::Index d = run.dim();
  const Vector first = nodes.front().z.head(d);
  const Vector last = nodes.back().z.head(d);
  double extent = 0.0;
  for (const auto& n : nodes) {
    extent = std::max({extent, (n.z.head(d) - first).norm(), (n.z.head(d) - last).norm()});
  }
  return extent;
}

double detect_burn_in(const SystemSpec& spec, double horizon) {
  if (spec.variant != Variant::HB_operator) {
    throw DomainError("detect_burn_in: expected an HB_operator spec");
  }
  const Scaling& mu = *spec.mu;
  const Scaling& gamma = *spec.gamma;
  const double t0 = spec.start_time;
  const double ratio_end = gamma.value(horizon) / mu.value(horizon);
  const double growth_end = mu.log_derivative(horizon);
  auto settled = [&](double t) {
    const double ratio = gamma.value(t) / mu.value(t);
    const double growth = mu.log_derivative(t);
    return std::abs(ratio - ratio_end) <= 0.01 * std::abs(ratio_end) + 1e-15 &&
           std::abs(growth - growth_end) <= 0.01 * std::abs(growth_end) + 1e-15;
  };
  constexpr int kPoints = 10'000;
  double burn_in = horizon;
  for (int k = kPoints - 1; k >= 0; --k) {
    const double t = t0 + (horizon - t0) * double(k) / double(kPoints - 1);
    if (!settled(t)) break;
    burn_in = t;
  }
  return burn_in;
}

double integrated_scaling(const Scaling& b, double t0, double t) {
  const double mid = 0.5 * (t + t0);
  if (const auto& form = b.closed_form()) {
    const double c = std::exp(form->log_coeff);
    if (form->power == 0.0) {
      if (form->rate == 0.0) return c * (t - mid);
      return c / form->rate * (std::exp(form->rate * t) - std::exp(form->rate * mid));
    }
    if (form->rate == 0.0) {
      const double q = form->power + 1.0;
      return c / q * (std::pow(t, q) - std::pow(mid, q));
    }
  }
  // Composite Simpson for the remaining cases.
  constexpr int kIntervals = 2000;
  const double h = (t - mid) / kIntervals;
  double acc = b.value(mid) + b.value(t);
  for (int k = 1; k < kIntervals; ++k) acc += (k % 2 ? 4.0 : 2.0) * b.value(mid + k * h);
  return acc * h / 3.0;
}

}  // namespace inertial
