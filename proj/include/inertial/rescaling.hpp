#pragma once

#include "inertial/dynamics.hpp"

#include <utility>
#include <vector>

namespace inertial {

enum class MapCase { function_case, operator_case, identity };

enum class MapDirection {
  heavy_to_vanishing,  // (y0, y1) -> (x0, x1), through tau
  vanishing_to_heavy,  // (x0, x1) -> (y0, y1), through sigma
};

/// tau: s -> t and its inverse sigma: t -> s,
///   tau(s) = (alpha - 1)/lambda ln(s/s0) + t0.
/// The operator case fixes lambda = 2(alpha - 1)/alpha, so tau(s) = (alpha/2) ln(s/s0) + t0.
class TimeMap {
 public:
  static TimeMap function_case(double alpha, double lambda, double s0, double t0);
  static TimeMap operator_case(double alpha, double s0, double t0);
  /// t = s; used to compare a trajectory with itself.
  static TimeMap identity();

  double tau(double s) const;
  double tau_dot(double s) const;
  double tau_ddot(double s) const;
  double sigma(double t) const;
  double sigma_dot(double t) const;
  double sigma_ddot(double t) const;

  MapCase map_case() const { return case_; }
  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  double s0() const { return s0_; }
  double t0() const { return t0_; }
  /// Set when alpha is at or below the threshold the rate transfer needs
  /// (3 for the function case, 2 for the operator case).
  bool below_transfer_threshold() const { return below_threshold_; }

 private:
  TimeMap() = default;
  MapCase case_ = MapCase::identity;
  double alpha_ = 0.0;
  double lambda_ = 1.0;
  double s0_ = 0.0;
  double t0_ = 0.0;
  // (alpha - 1) / lambda
  double slope_ = 1.0;
  bool below_threshold_ = false;
};

/// b(t) = (lambda s0 / (alpha - 1))^2 exp(2 lambda (t - t0)/(alpha - 1)); alpha > 3.
Scaling special_b(double alpha, double lambda, double s0, double t0);

struct OperatorScalings {
  Scaling mu;
  Scaling gamma;
  double lambda;
};

/// mu = gamma = (2 s0/alpha) exp(2 (t - t0)/alpha), lambda = 2(alpha - 1)/alpha; alpha > 2.
OperatorScalings special_mu_gamma(double alpha, double s0, double t0);

/// Position is unchanged; velocity is multiplied by tau'(s0) or its inverse.
std::pair<Vector, Vector> map_initial_conditions(const TimeMap& map, MapDirection direction,
                                                 const Vector& position,
                                                 const Vector& velocity);

/// Heavy Ball twin of a vanishing-damping spec: special scaling(s), lambda
/// and mapped initial conditions.  `lambda` is ignored for FOGDA specs.
SystemSpec heavy_twin(const SystemSpec& vanishing, double lambda, double t0);
TimeMap twin_map(const SystemSpec& vanishing, double lambda, double t0);

struct EquivalenceReport {
  std::vector<double> sample_times;
  std::vector<double> deviations;
  std::vector<double> velocity_deviations;
  double max_deviation = 0.0;
  double velocity_max_deviation = 0.0;
};

/// Compares x(s) against y(tau(s)) on n_samples evenly spaced s in the
/// intersection of both time ranges.  Velocities are compared as
/// x'(s) against tau'(s) y'(tau(s)).
EquivalenceReport equivalence_check(const Run& heavy, const Run& vanishing,
                                    const TimeMap& map, int n_samples);

}  // namespace inertial
