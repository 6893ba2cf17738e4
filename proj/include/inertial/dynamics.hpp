#pragma once

#include "inertial/core.hpp"
#include "inertial/integrator.hpp"
#include "inertial/problems.hpp"
#include "inertial/scaling.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace inertial {

enum class Variant { HBF_function, AVD_function, HB_operator, FOGDA_operator };

std::string to_string(Variant variant);
Variant variant_from_string(const std::string& name);
bool is_function_variant(Variant variant);
bool is_heavy_ball(Variant variant);

/// Complete description of one initial value problem.
///
///   HBF_function    y'' + lambda y' + b(t) grad f(y) = 0
///   AVD_function    x'' + (alpha/s) x' + grad f(x) = 0
///   HB_operator     y'' + lambda y' + mu(t) d/dt V(y) + gamma(t) V(y) = 0
///   FOGDA_operator  x'' + (alpha/s) x' + d/ds V(x) + (alpha/2s) V(x) = 0
struct SystemSpec {
  Variant variant = Variant::HBF_function;
  double lambda = 0.0;
  double alpha = 0.0;
  std::optional<Scaling> b;
  std::optional<Scaling> mu;
  std::optional<Scaling> gamma;
  std::shared_ptr<const ScalarProblem> function;
  std::shared_ptr<const OperatorProblem> op;
  double start_time = 0.0;
  Vector y0;
  Vector y1;

  static SystemSpec hbf(std::shared_ptr<const ScalarProblem> f, double lambda,
                        Scaling b, double t0, Vector y0, Vector y1);
  static SystemSpec avd(std::shared_ptr<const ScalarProblem> f, double alpha,
                        double s0, Vector x0, Vector x1);
  static SystemSpec hb_operator(std::shared_ptr<const OperatorProblem> v,
                                double lambda, Scaling mu, Scaling gamma,
                                double t0, Vector y0, Vector y1);
  static SystemSpec fogda(std::shared_ptr<const OperatorProblem> v, double alpha,
                          double s0, Vector x0, Vector x1);

  int dim() const;
  /// Throws DomainError when a field required by the variant is missing or
  /// a parameter is out of range.
  void validate() const;
};

/// u(t0) for the variant: lambda y0 + y1 (HBF), x1 (AVD),
/// lambda y0 + y1 + mu(t0) V(y0) (HB operator), x1 + V(x0) (FOGDA).
Vector initial_auxiliary(const SystemSpec& spec);
Vector initial_state(const SystemSpec& spec);

/// Velocity of the position variable recovered from (p, u).
Vector velocity(const SystemSpec& spec, double t, const Vector& p, const Vector& u);

Field<double> hbf_rhs(const SystemSpec& spec);
Field<double> avd_rhs(const SystemSpec& spec);
Field<double> hbop_rhs(const SystemSpec& spec);
Field<double> fogda_rhs(const SystemSpec& spec);
/// Dispatches on spec.variant.
Field<double> make_field(const SystemSpec& spec);

/// A trajectory tied to the spec that produced it.
struct Run {
  std::shared_ptr<const SystemSpec> spec;
  Trajectory<double> trajectory;

  int dim() const { return spec->dim(); }
  State<double> node_state(std::size_t i) const;
  Vector node_velocity(std::size_t i) const;
  State<double> state_at(double t) const;
  Vector velocity_at(double t) const;
};

Run simulate(const SystemSpec& spec, double t_end, const IntegratorControls& controls);

enum class AssumptionOutcome { pass, fail, indeterminate };

std::string to_string(AssumptionOutcome outcome);

struct AssumptionReport {
  bool pass = false;
  AssumptionOutcome outcome = AssumptionOutcome::fail;
  std::map<std::string, double> quantities;
  std::vector<std::string> violated;
  /// Conditions evaluated on a sampling grid rather than in closed form.
  bool sampled = false;
};

/// Required strict slack for every assumption inequality.
inline constexpr double kAssumptionSlack = 1e-12;

/// sup_{t >= t0} b'(t)/b(t) < lambda.
AssumptionReport validate_assumption_function(double lambda, const Scaling& b,
                                              double t0, double horizon);

/// lim gamma/mu = L > 0, sup mu'/gamma < 1, 2 lambda - 3L + inf mu'/mu > 0.
AssumptionReport validate_assumption_operator(double lambda, const Scaling& mu,
                                              const Scaling& gamma, double t0,
                                              double horizon);

/// Closed-form or sampled sup/inf of b'/b on [t0, horizon] (closed forms
/// cover [t0, inf)).
struct RatioBounds {
  double sup = 0.0;
  double inf = 0.0;
  bool sampled = false;
};
RatioBounds log_derivative_bounds(const Scaling& s, double t0, double horizon);

}  // namespace inertial
