#include "inertial/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace inertial {

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::HBF_function: return "HBF_function";
    case Variant::AVD_function: return "AVD_function";
    case Variant::HB_operator: return "HB_operator";
    case Variant::FOGDA_operator: return "FOGDA_operator";
  }
  return "HBF_function";
}

Variant variant_from_string(const std::string& name) {
  if (name == "HBF_function") return Variant::HBF_function;
  if (name == "AVD_function") return Variant::AVD_function;
  if (name == "HB_operator") return Variant::HB_operator;
  if (name == "FOGDA_operator") return Variant::FOGDA_operator;
  throw DomainError("unknown variant '" + name + "'");
}

bool is_function_variant(Variant variant) {
  return variant == Variant::HBF_function || variant == Variant::AVD_function;
}

bool is_heavy_ball(Variant variant) {
  return variant == Variant::HBF_function || variant == Variant::HB_operator;
}

SystemSpec SystemSpec::hbf(std::shared_ptr<const ScalarProblem> f, double lambda,
                           Scaling b, double t0, Vector y0, Vector y1) {
  SystemSpec s;
  s.variant = Variant::HBF_function;
  s.function = std::move(f);
  s.lambda = lambda;
  s.b = std::move(b);
  s.start_time = t0;
  s.y0 = std::move(y0);
  s.y1 = std::move(y1);
  s.validate();
  return s;
}

SystemSpec SystemSpec::avd(std::shared_ptr<const ScalarProblem> f, double alpha,
                           double s0, Vector x0, Vector x1) {
  SystemSpec s;
  s.variant = Variant::AVD_function;
  s.function = std::move(f);
  s.alpha = alpha;
  s.start_time = s0;
  s.y0 = std::move(x0);
  s.y1 = std::move(x1);
  s.validate();
  return s;
}

SystemSpec SystemSpec::hb_operator(std::shared_ptr<const OperatorProblem> v,
                                   double lambda, Scaling mu, Scaling gamma,
                                   double t0, Vector y0, Vector y1) {
  SystemSpec s;
  s.variant = Variant::HB_operator;
  s.op = std::move(v);
  s.lambda = lambda;
  s.mu = std::move(mu);
  s.gamma = std::move(gamma);
  s.start_time = t0;
  s.y0 = std::move(y0);
  s.y1 = std::move(y1);
  s.validate();
  return s;
}

SystemSpec SystemSpec::fogda(std::shared_ptr<const OperatorProblem> v, double alpha,
                             double s0, Vector x0, Vector x1) {
  SystemSpec s;
  s.variant = Variant::FOGDA_operator;
  s.op = std::move(v);
  s.alpha = alpha;
  s.start_time = s0;
  s.y0 = std::move(x0);
  s.y1 = std::move(x1);
  s.validate();
  return s;
}

int SystemSpec::dim() const {
  if (is_function_variant(variant)) return function ? function->dim : 0;
  return op ? op->dim : 0;
}

void SystemSpec::validate() const {
  const std::string name = to_string(variant);
  if (is_function_variant(variant) && !function) {
    throw DomainError(name + ": missing scalar problem");
  }
  if (!is_function_variant(variant) && !op) {
    throw DomainError(name + ": missing operator problem");
  }
  switch (variant) {
    case Variant::HBF_function:
      if (!(lambda > 0.0)) throw DomainError(name + ": lambda must be positive");
      if (!b) throw DomainError(name + ": missing scaling b");
      if (start_time < 0.0) throw DomainError(name + ": t0 must be nonnegative");
      if (b->closed_form() && b->closed_form()->power > 0.0 && !(start_time > 0.0)) {
        throw DomainError(name + ": polynomial scaling needs t0 > 0");
      }
      break;
    case Variant::AVD_function:
      if (!(alpha > 3.0)) throw DomainError(name + ": alpha must exceed 3");
      if (!(start_time > 0.0)) throw DomainError(name + ": s0 must be positive");
      break;
    case Variant::HB_operator:
      if (!(lambda > 0.0)) throw DomainError(name + ": lambda must be positive");
      if (!mu || !gamma) throw DomainError(name + ": missing scaling mu or gamma");
      if (start_time < 0.0) throw DomainError(name + ": t0 must be nonnegative");
      break;
    case Variant::FOGDA_operator:
      if (!(alpha > 2.0)) throw DomainError(name + ": alpha must exceed 2");
      if (!(start_time > 0.0)) throw DomainError(name + ": s0 must be positive");
      break;
  }
  const int d = dim();
  if (y0.size() != d || y1.size() != d) {
    throw DomainError(name + ": initial position/velocity must have dimension " +
                      std::to_string(d));
  }
}

Vector initial_auxiliary(const SystemSpec& spec) {
  switch (spec.variant) {
    case Variant::HBF_function: return spec.lambda * spec.y0 + spec.y1;
    case Variant::AVD_function: return spec.y1;
    case Variant::HB_operator:
      return spec.lambda * spec.y0 + spec.y1 +
             spec.mu->value(spec.start_time) * spec.op->apply(spec.y0);
    case Variant::FOGDA_operator: return spec.y1 + spec.op->apply(spec.y0);
  }
  return spec.y1;
}

Vector initial_state(const SystemSpec& spec) {
  return stack<double>(spec.y0, initial_auxiliary(spec));
}

Vector velocity(const SystemSpec& spec, double t, const Vector& p, const Vector& u) {
  switch (spec.variant) {
    case Variant::HBF_function: return u - spec.lambda * p;
    case Variant::AVD_function: return u;
    case Variant::HB_operator: return u - spec.lambda * p - spec.mu->value(t) * spec.op->apply(p);
    case Variant::FOGDA_operator: return u - spec.op->apply(p);
  }
  return u;
}

namespace {

void require_variant(const SystemSpec& spec, Variant expected) {
  if (spec.variant != expected) {
    throw DomainError("field for " + to_string(expected) + " requested for a " +
                      to_string(spec.variant) + " spec");
  }
  spec.validate();
}

void require_positive_time(double s, const char* who) {
  if (!(s > 0.0)) {
    throw DomainError(std::string(who) + ": singular damping at s = " + std::to_string(s));
  }
}

}  // namespace

Field<double> hbf_rhs(const SystemSpec& spec) {
  require_variant(spec, Variant::HBF_function);
  auto f = spec.function;
  const Scaling b = *spec.b;
  const double lambda = spec.lambda;
  return [f, b, lambda](double t, const Vector& z) -> Vector {
    const Eigen::Index d = z.size() / 2;
    Vector dz(z.size());
    dz.head(d) = z.tail(d) - lambda * z.head(d);
    dz.tail(d) = -b.value(t) * f->gradient(z.head(d));
    return dz;
  };
}

Field<double> avd_rhs(const SystemSpec& spec) {
  require_variant(spec, Variant::AVD_function);
  auto f = spec.function;
  const double alpha = spec.alpha;
  return [f, alpha](double s, const Vector& z) -> Vector {
    require_positive_time(s, "avd_rhs");
    const Eigen::Index d = z.size() / 2;
    Vector dz(z.size());
    dz.head(d) = z.tail(d);
    dz.tail(d) = -(alpha / s) * z.tail(d) - f->gradient(z.head(d));
    return dz;
  };
}

Field<double> hbop_rhs(const SystemSpec& spec) {
  require_variant(spec, Variant::HB_operator);
  auto v = spec.op;
  const Scaling mu = *spec.mu;
  const Scaling gamma = *spec.gamma;
  const double lambda = spec.lambda;
  return [v, mu, gamma, lambda](double t, const Vector& z) -> Vector {
    const Eigen::Index d = z.size() / 2;
    const Vector vp = v->apply(z.head(d));
    Vector dz(z.size());
    dz.head(d) = z.tail(d) - lambda * z.head(d) - mu.value(t) * vp;
    dz.tail(d) = (mu.derivative(t) - gamma.value(t)) * vp;
    return dz;
  };
}

Field<double> fogda_rhs(const SystemSpec& spec) {
  require_variant(spec, Variant::FOGDA_operator);
  auto v = spec.op;
  const double alpha = spec.alpha;
  // u := x' + V(x) removes d/ds V(x) from the second-order form.
  return [v, alpha](double s, const Vector& z) -> Vector {
    require_positive_time(s, "fogda_rhs");
    const Eigen::Index d = z.size() / 2;
    const Vector vp = v->apply(z.head(d));
    Vector dz(z.size());
    dz.head(d) = z.tail(d) - vp;
    dz.tail(d) = -(alpha / s) * z.tail(d) + (alpha / (2.0 * s)) * vp;
    return dz;
  };
}

Field<double> make_field(const SystemSpec& spec) {
  switch (spec.variant) {
    case Variant::HBF_function: return hbf_rhs(spec);
    case Variant::AVD_function: return avd_rhs(spec);
    case Variant::HB_operator: return hbop_rhs(spec);
    case Variant::FOGDA_operator: return fogda_rhs(spec);
  }
  throw DomainError("unknown variant");
}

State<double> Run::node_state(std::size_t i) const {
  const auto& n = trajectory.nodes.at(i);
  return unstack(n.t, n.z);
}

Vector Run::node_velocity(std::size_t i) const {
  const auto st = node_state(i);
  return velocity(*spec, st.time, st.p, st.u);
}

State<double> Run::state_at(double t) const { return dense_state(trajectory, t); }

Vector Run::velocity_at(double t) const {
  const auto st = state_at(t);
  return velocity(*spec, t, st.p, st.u);
}

Run simulate(const SystemSpec& spec, double t_end, const IntegratorControls& controls) {
  spec.validate();
  auto shared = std::make_shared<const SystemSpec>(spec);
  return Run{shared, integrate<double>(make_field(spec), spec.start_time,
                                       initial_state(spec), t_end, controls)};
}

std::string to_string(AssumptionOutcome outcome) {
  switch (outcome) {
    case AssumptionOutcome::pass: return "pass";
    case AssumptionOutcome::fail: return "fail";
    case AssumptionOutcome::indeterminate: return "indeterminate";
  }
  return "fail";
}

namespace {

constexpr int kGridPoints = 10'000;
constexpr double kStabilizationTol = 1e-6;

// Log-spaced in (t - t0 + 1) so that the early transient is resolved.
std::vector<double> log_grid(double t0, double horizon) {
  std::vector<double> grid(kGridPoints);
  const double top = std::log(horizon - t0 + 1.0);
  for (int k = 0; k < kGridPoints; ++k) {
    grid[k] = t0 - 1.0 + std::exp(top * double(k) / double(kGridPoints - 1));
  }
  grid.front() = t0;
  grid.back() = horizon;
  return grid;
}

template <typename F>
std::pair<double, double> sampled_bounds(F&& f, double t0, double horizon) {
  double sup = -std::numeric_limits<double>::infinity();
  double inf = std::numeric_limits<double>::infinity();
  for (double t : log_grid(t0, horizon)) {
    const double v = f(t);
    sup = std::max(sup, v);
    inf = std::min(inf, v);
  }
  return {sup, inf};
}

void finish(AssumptionReport& report) {
  if (report.outcome != AssumptionOutcome::indeterminate) {
    report.outcome = report.violated.empty() ? AssumptionOutcome::pass : AssumptionOutcome::fail;
  }
  report.pass = report.outcome == AssumptionOutcome::pass;
}

}  // namespace

RatioBounds log_derivative_bounds(const Scaling& s, double t0, double horizon) {
  if (const auto& form = s.closed_form()) {
    RatioBounds r;
    r.inf = form->rate;
    if (form->power == 0.0) {
      r.sup = form->rate;
    } else if (t0 > 0.0) {
      r.sup = form->rate + form->power / t0;
    } else {
      r.sup = std::numeric_limits<double>::infinity();
    }
    return r;
  }
  const auto [sup, inf] =
      sampled_bounds([&](double t) { return s.log_derivative(t); }, t0, horizon);
  return {sup, inf, true};
}

AssumptionReport validate_assumption_function(double lambda, const Scaling& b,
                                              double t0, double horizon) {
  if (!(horizon > t0)) throw DomainError("validate: horizon must exceed t0");
  AssumptionReport report;
  const RatioBounds bounds = log_derivative_bounds(b, t0, horizon);
  report.sampled = bounds.sampled;
  const double slack = lambda - bounds.sup;
  report.quantities["lambda"] = lambda;
  report.quantities["sup_b_dot_over_b"] = bounds.sup;
  report.quantities["slack"] = slack;
  if (!(slack > kAssumptionSlack)) report.violated.push_back("sup_b_dot_over_b_lt_lambda");
  finish(report);
  return report;
}

AssumptionReport validate_assumption_operator(double lambda, const Scaling& mu,
                                              const Scaling& gamma, double t0,
                                              double horizon) {
  if (!(horizon > t0)) throw DomainError("validate: horizon must exceed t0");
  AssumptionReport report;
  report.quantities["lambda"] = lambda;

  const auto& fm = mu.closed_form();
  const auto& fg = gamma.closed_form();
  const bool closed = fm.has_value() && fg.has_value();
  const bool same_growth = closed && fm->rate == fg->rate && fm->power == fg->power;

  // L = lim gamma / mu
  std::optional<double> limit;
  if (closed) {
    const double dr = fg->rate - fm->rate;
    const double dp = fg->power - fm->power;
    if (dr != 0.0) {
      limit = dr > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    } else if (dp != 0.0) {
      limit = dp > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    } else {
      limit = std::exp(fg->log_coeff - fm->log_coeff);
    }
  } else {
    report.sampled = true;
    const double late = gamma.value(horizon) / mu.value(horizon);
    const double earlier_t = horizon - (horizon - t0) / 10.0;
    const double earlier = gamma.value(earlier_t) / mu.value(earlier_t);
    const double variation = std::abs(late - earlier) / std::max(std::abs(late), 1e-300);
    report.quantities["L_last_decade_variation"] = variation;
    if (variation <= kStabilizationTol) limit = late;
  }

  // sup mu'/gamma
  double sup_mu_dot_gamma;
  if (same_growth) {
    const double ratio = std::exp(fm->log_coeff - fg->log_coeff);
    sup_mu_dot_gamma = ratio * log_derivative_bounds(mu, t0, horizon).sup;
  } else {
    report.sampled = true;
    sup_mu_dot_gamma =
        sampled_bounds([&](double t) { return mu.derivative(t) / gamma.value(t); }, t0, horizon)
            .first;
  }
  const RatioBounds mu_bounds = log_derivative_bounds(mu, t0, horizon);
  report.sampled = report.sampled || mu_bounds.sampled;

  report.quantities["sup_mu_dot_over_gamma"] = sup_mu_dot_gamma;
  report.quantities["inf_mu_dot_over_mu"] = mu_bounds.inf;
  if (!(1.0 - sup_mu_dot_gamma > kAssumptionSlack)) {
    report.violated.push_back("sup_mu_dot_over_gamma_lt_1");
  }

  if (!limit) {
    report.outcome = AssumptionOutcome::indeterminate;
    report.violated.push_back("limit_ratio_indeterminate");
  } else {
    const double L = *limit;
    report.quantities["L"] = L;
    if (!(L > kAssumptionSlack) || !std::isfinite(L)) {
      report.violated.push_back("limit_ratio_positive_finite");
    }
    const double combo = 2.0 * lambda - 3.0 * L + mu_bounds.inf;
    report.quantities["two_lambda_minus_3L_plus_inf"] = combo;
    report.quantities["lambda_minus_L"] = lambda - L;
    if (!(combo > kAssumptionSlack)) {
      report.violated.push_back("two_lambda_minus_3L_plus_inf_positive");
    }
  }

  if (mu.family() == ScalingFamily::special_operator_case) {
    const double alpha = mu.parameter("alpha");
    const double lower = 3.0 * (alpha - 1.0) / (2.0 * alpha - 1.0);
    const double upper = alpha - 1.0;
    report.quantities["lambda_window_lower"] = lower;
    report.quantities["lambda_window_upper"] = upper;
    report.quantities["lambda_window_nonempty"] = lower < upper ? 1.0 : 0.0;
  }

  finish(report);
  return report;
}

}  // namespace inertial
