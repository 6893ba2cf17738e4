#include "inertial/rescaling.hpp"

#include <algorithm>
#include <cmath>

namespace inertial {

TimeMap TimeMap::function_case(double alpha, double lambda, double s0, double t0) {
  if (!(alpha > 1.0)) throw DomainError("time map: alpha must exceed 1");
  if (!(lambda > 0.0)) throw DomainError("time map: lambda must be positive");
  if (!(s0 > 0.0)) throw DomainError("time map: s0 must be positive");
  if (t0 < 0.0) throw DomainError("time map: t0 must be nonnegative");
  TimeMap m;
  m.case_ = MapCase::function_case;
  m.alpha_ = alpha;
  m.lambda_ = lambda;
  m.s0_ = s0;
  m.t0_ = t0;
  m.slope_ = (alpha - 1.0) / lambda;
  m.below_threshold_ = alpha <= 3.0;
  return m;
}

TimeMap TimeMap::operator_case(double alpha, double s0, double t0) {
  if (!(alpha > 1.0)) throw DomainError("time map: alpha must exceed 1");
  if (!(s0 > 0.0)) throw DomainError("time map: s0 must be positive");
  if (t0 < 0.0) throw DomainError("time map: t0 must be nonnegative");
  TimeMap m;
  m.case_ = MapCase::operator_case;
  m.alpha_ = alpha;
  m.lambda_ = 2.0 * (alpha - 1.0) / alpha;
  m.s0_ = s0;
  m.t0_ = t0;
  m.slope_ = alpha / 2.0;
  m.below_threshold_ = alpha <= 2.0;
  return m;
}

TimeMap TimeMap::identity() { return TimeMap{}; }

double TimeMap::tau(double s) const {
  if (case_ == MapCase::identity) return s;
  if (s < s0_) throw DomainError("tau: s = " + std::to_string(s) + " is below s0");
  return slope_ * std::log(s / s0_) + t0_;
}

double TimeMap::tau_dot(double s) const {
  if (case_ == MapCase::identity) return 1.0;
  return slope_ / s;
}

double TimeMap::tau_ddot(double s) const {
  if (case_ == MapCase::identity) return 0.0;
  return -slope_ / (s * s);
}

double TimeMap::sigma(double t) const {
  if (case_ == MapCase::identity) return t;
  if (t < t0_) throw DomainError("sigma: t = " + std::to_string(t) + " is below t0");
  return s0_ * std::exp((t - t0_) / slope_);
}

double TimeMap::sigma_dot(double t) const {
  if (case_ == MapCase::identity) return 1.0;
  return sigma(t) / slope_;
}

double TimeMap::sigma_ddot(double t) const {
  if (case_ == MapCase::identity) return 0.0;
  return sigma(t) / (slope_ * slope_);
}

Scaling special_b(double alpha, double lambda, double s0, double t0) {
  if (!(alpha > 3.0)) throw DomainError("special_b: alpha must exceed 3");
  return Scaling::special_function_case(alpha, lambda, s0, t0);
}

OperatorScalings special_mu_gamma(double alpha, double s0, double t0) {
  if (!(alpha > 2.0)) throw DomainError("special_mu_gamma: alpha must exceed 2");
  const Scaling s = Scaling::special_operator_case(alpha, s0, t0);
  return {s, s, 2.0 * (alpha - 1.0) / alpha};
}

std::pair<Vector, Vector> map_initial_conditions(const TimeMap& map, MapDirection direction,
                                                 const Vector& position,
                                                 const Vector& velocity) {
  const double factor = map.tau_dot(map.s0());
  if (direction == MapDirection::heavy_to_vanishing) return {position, factor * velocity};
  return {position, velocity / factor};
}

TimeMap twin_map(const SystemSpec& vanishing, double lambda, double t0) {
  switch (vanishing.variant) {
    case Variant::AVD_function:
      return TimeMap::function_case(vanishing.alpha, lambda, vanishing.start_time, t0);
    case Variant::FOGDA_operator:
      return TimeMap::operator_case(vanishing.alpha, vanishing.start_time, t0);
    default:
      throw DomainError("twin_map: expected a vanishing-damping spec, got " +
                        to_string(vanishing.variant));
  }
}

SystemSpec heavy_twin(const SystemSpec& vanishing, double lambda, double t0) {
  vanishing.validate();
  const TimeMap map = twin_map(vanishing, lambda, t0);
  auto [y0, y1] = map_initial_conditions(map, MapDirection::vanishing_to_heavy,
                                         vanishing.y0, vanishing.y1);
  if (vanishing.variant == Variant::AVD_function) {
    return SystemSpec::hbf(vanishing.function, lambda,
                           special_b(vanishing.alpha, lambda, vanishing.start_time, t0), t0,
                           std::move(y0), std::move(y1));
  }
  const auto scalings = special_mu_gamma(vanishing.alpha, vanishing.start_time, t0);
  return SystemSpec::hb_operator(vanishing.op, scalings.lambda, scalings.mu, scalings.gamma,
                                 t0, std::move(y0), std::move(y1));
}

EquivalenceReport equivalence_check(const Run& heavy, const Run& vanishing,
                                    const TimeMap& map, int n_samples) {
  if (n_samples < 2) throw DomainError("equivalence_check: n_samples must be >= 2");
  const auto& ht = heavy.trajectory;
  const auto& vt = vanishing.trajectory;
  const double lo = std::max(vt.start_time(), map.sigma(ht.start_time()));
  double hi = std::min(vt.end_time(), map.sigma(ht.end_time()));
  // sigma(tau(s)) can round past the heavy run's last node.
  while (hi > lo && map.tau(hi) > ht.end_time()) hi = std::nextafter(hi, lo);
  if (!(hi > lo)) {
    throw RangeError("equivalence_check: mapped time ranges do not overlap");
  }

  EquivalenceReport report;
  report.sample_times.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double s = i + 1 == n_samples ? hi : lo + (hi - lo) * double(i) / (n_samples - 1);
    const double t = std::clamp(map.tau(s), ht.start_time(), ht.end_time());
    const State<double> x = vanishing.state_at(s);
    const State<double> y = heavy.state_at(t);
    const Vector xdot = velocity(*vanishing.spec, s, x.p, x.u);
    const Vector ydot = velocity(*heavy.spec, t, y.p, y.u);
    const double dev = (x.p - y.p).norm();
    const double vdev = (xdot - map.tau_dot(s) * ydot).norm();
    report.sample_times.push_back(s);
    report.deviations.push_back(dev);
    report.velocity_deviations.push_back(vdev);
    report.max_deviation = std::max(report.max_deviation, dev);
    report.velocity_max_deviation = std::max(report.velocity_max_deviation, vdev);
  }
  return report;
}

}  // namespace inertial
