#pragma once

#include "inertial/core.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>

namespace inertial {

enum class ScalingFamily {
  exponential,
  polynomial,
  special_function_case,
  special_operator_case,
  constant,
  custom,
};

std::string to_string(ScalingFamily family);
ScalingFamily scaling_family_from_string(const std::string& name);

// Every closed-form family is c * exp(rate * t) * t^power.
struct ExpPowerForm {
  double log_coeff = 0.0;
  double rate = 0.0;
  double power = 0.0;
};

/// Positive, nondecreasing time scaling t -> b(t) with its derivative.
/// Used for b of the function-case Heavy Ball system and for mu, gamma of
/// the operator case.
class Scaling {
 public:
  static Scaling exponential(double kappa, double rho);
  static Scaling polynomial(double kappa, double rho);
  /// (lambda s0 / (alpha - 1))^2 exp(2 lambda (t - t0) / (alpha - 1)); alpha > 1.
  static Scaling special_function_case(double alpha, double lambda, double s0,
                                       double t0);
  /// (2 s0 / alpha) exp(2 (t - t0) / alpha); alpha > 0.
  static Scaling special_operator_case(double alpha, double s0, double t0);
  static Scaling constant(double kappa);
  static Scaling custom(std::string name, std::function<double(double)> value,
                        std::function<double(double)> derivative);

  double value(double t) const;
  double derivative(double t) const;
  /// derivative(t) / value(t)
  double log_derivative(double t) const;

  ScalingFamily family() const { return family_; }
  const std::optional<ExpPowerForm>& closed_form() const { return form_; }
  /// Family parameters by name (kappa, rho, alpha, lambda, s0, t0).
  const std::map<std::string, double>& parameters() const { return params_; }
  double parameter(const std::string& name) const;
  const std::string& name() const { return name_; }

 private:
  Scaling() = default;
  static Scaling from_form(ScalingFamily family, ExpPowerForm form,
                           std::map<std::string, double> params);

  ScalingFamily family_ = ScalingFamily::constant;
  std::optional<ExpPowerForm> form_;
  std::map<std::string, double> params_;
  std::string name_;
  std::function<double(double)> value_;
  std::function<double(double)> derivative_;
};

}  // namespace inertial
