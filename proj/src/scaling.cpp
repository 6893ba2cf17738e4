#include "inertial/scaling.hpp"

#include <cmath>
#include <utility>

namespace inertial {

std::string to_string(ScalingFamily family) {
  switch (family) {
    case ScalingFamily::exponential: return "exponential";
    case ScalingFamily::polynomial: return "polynomial";
    case ScalingFamily::special_function_case: return "special_function_case";
    case ScalingFamily::special_operator_case: return "special_operator_case";
    case ScalingFamily::constant: return "constant";
    case ScalingFamily::custom: return "custom";
  }
  return "custom";
}

ScalingFamily scaling_family_from_string(const std::string& name) {
  if (name == "exponential") return ScalingFamily::exponential;
  if (name == "polynomial") return ScalingFamily::polynomial;
  if (name == "special_function_case") return ScalingFamily::special_function_case;
  if (name == "special_operator_case") return ScalingFamily::special_operator_case;
  if (name == "constant") return ScalingFamily::constant;
  throw DomainError("unknown scaling family '" + name + "'");
}

Scaling Scaling::from_form(ScalingFamily family, ExpPowerForm form,
                           std::map<std::string, double> params) {
  Scaling s;
  s.family_ = family;
  s.form_ = form;
  s.params_ = std::move(params);
  s.name_ = to_string(family);
  s.value_ = [form](double t) {
    double v = std::exp(form.log_coeff + form.rate * t);
    if (form.power != 0.0) v *= std::pow(t, form.power);
    return v;
  };
  s.derivative_ = [form](double t) {
    double v = std::exp(form.log_coeff + form.rate * t);
    if (form.power == 0.0) return form.rate * v;
    return v * (form.rate * std::pow(t, form.power) +
                form.power * std::pow(t, form.power - 1.0));
  };
  return s;
}

Scaling Scaling::exponential(double kappa, double rho) {
  if (!(kappa > 0.0)) throw DomainError("exponential scaling: kappa must be positive");
  if (rho < 0.0) throw DomainError("exponential scaling: rho must be nonnegative");
  return from_form(ScalingFamily::exponential, {std::log(kappa), rho, 0.0},
                   {{"kappa", kappa}, {"rho", rho}});
}

Scaling Scaling::polynomial(double kappa, double rho) {
  if (!(kappa > 0.0)) throw DomainError("polynomial scaling: kappa must be positive");
  if (rho < 0.0) throw DomainError("polynomial scaling: rho must be nonnegative");
  return from_form(ScalingFamily::polynomial, {std::log(kappa), 0.0, rho},
                   {{"kappa", kappa}, {"rho", rho}});
}

Scaling Scaling::special_function_case(double alpha, double lambda, double s0,
                                       double t0) {
  if (!(alpha > 1.0)) throw DomainError("special_function_case: alpha must exceed 1");
  if (!(lambda > 0.0)) throw DomainError("special_function_case: lambda must be positive");
  if (!(s0 > 0.0)) throw DomainError("special_function_case: s0 must be positive");
  const double rate = 2.0 * lambda / (alpha - 1.0);
  const double log_coeff = 2.0 * std::log(lambda * s0 / (alpha - 1.0)) - rate * t0;
  return from_form(ScalingFamily::special_function_case, {log_coeff, rate, 0.0},
                   {{"alpha", alpha}, {"lambda", lambda}, {"s0", s0}, {"t0", t0}});
}

Scaling Scaling::special_operator_case(double alpha, double s0, double t0) {
  if (!(alpha > 0.0)) throw DomainError("special_operator_case: alpha must be positive");
  if (!(s0 > 0.0)) throw DomainError("special_operator_case: s0 must be positive");
  const double rate = 2.0 / alpha;
  const double log_coeff = std::log(2.0 * s0 / alpha) - rate * t0;
  return from_form(ScalingFamily::special_operator_case, {log_coeff, rate, 0.0},
                   {{"alpha", alpha}, {"s0", s0}, {"t0", t0}});
}

Scaling Scaling::constant(double kappa) {
  if (!(kappa > 0.0)) throw DomainError("constant scaling: kappa must be positive");
  return from_form(ScalingFamily::constant, {std::log(kappa), 0.0, 0.0},
                   {{"kappa", kappa}});
}

Scaling Scaling::custom(std::string name, std::function<double(double)> value,
                        std::function<double(double)> derivative) {
  Scaling s;
  s.family_ = ScalingFamily::custom;
  s.name_ = std::move(name);
  s.value_ = std::move(value);
  s.derivative_ = std::move(derivative);
  return s;
}

double Scaling::value(double t) const { return value_(t); }

double Scaling::derivative(double t) const { return derivative_(t); }

double Scaling::log_derivative(double t) const {
  if (form_) return form_->rate + (form_->power != 0.0 ? form_->power / t : 0.0);
  return derivative_(t) / value_(t);
}

double Scaling::parameter(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) {
    throw DomainError("scaling '" + name_ + "' has no parameter '" + name + "'");
  }
  return it->second;
}

}  // namespace inertial
