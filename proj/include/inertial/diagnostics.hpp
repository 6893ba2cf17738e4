#pragma once

#include "inertial/dynamics.hpp"
#include "inertial/rescaling.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace inertial {

struct Series {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
  void push_back(double t, double v) {
    times.push_back(t);
    values.push_back(v);
  }
};

/// eta in [0, lambda] and the reference point x* (minimizer or zero).
struct EnergyParams {
  double eta = 0.0;
  Vector anchor;
};

// Pointwise energies; the series versions below evaluate these at nodes.

/// b (f(y) - inf f) + 1/2 ||eta (y - x*) + y'||^2 + 1/2 eta (lambda - eta) ||y - x*||^2
double energy_function_at(double b, double f_gap, const Vector& y, const Vector& ydot,
                          const Vector& anchor, double eta, double lambda);

/// (f(y) - inf f) + ||y'||^2 / (2 b)
double lyapunov_W_at(double b, double f_gap, const Vector& ydot);

/// The four parts of the operator-case energy, in order E1..E4.
std::array<double, 4> energy_operator_at(double mu, const Vector& y, const Vector& ydot,
                                         const Vector& vy, const Vector& anchor, double eta,
                                         double lambda);

/// Midpoint between sup b'/b and lambda.
double default_eta(const SystemSpec& hbf_spec, double horizon);

/// lambda - (lambda - L)/2, i.e. eps = (lambda - L)/2.
double default_operator_eta(const SystemSpec& hb_operator_spec, double horizon);

Series energy_function_case(const Run& run, const EnergyParams& params);
Series lyapunov_W(const Run& run);

struct OperatorEnergy {
  Series total;
  std::array<Series, 4> components;
};
OperatorEnergy energy_operator_case(const Run& run, const EnergyParams& params);

struct Discriminant {
  double delta = 0.0;
  std::optional<std::pair<double, double>> roots;
};

/// Reduced discriminant of the eps-parabola at time t and its roots when
/// positive.
Discriminant parabola_discriminant(double t, double lambda, const Scaling& mu,
                                   const Scaling& gamma);

enum class FormSign { nonnegative_form, nonpositive_form, indefinite };
std::string to_string(FormSign sign);

struct FormClassification {
  FormSign sign = FormSign::indefinite;
  bool degenerate = false;  // A == 0
};

/// Sign of A||x||^2 + 2B<x, y> + C||y||^2 over all x, y.
FormClassification quadratic_form_sign(double A, double B, double C);

/// Function variants: f_gap, velocity_norm.
/// Operator variants: operator_norm, inner_product, velocity_norm.
std::map<std::string, Series> residual_series(const Run& run);

enum class RateVerdict { small_o, boundary_O, fail };
std::string to_string(RateVerdict verdict);

struct WindowMax {
  double start = 0.0;
  double max = 0.0;
};

struct RateCertificate {
  double exponent = 0.0;
  std::vector<WindowMax> decade_maxima;
  bool nonincreasing = false;
  bool strict_decay = false;
  bool pass = false;
  double slack = 0.0;
  RateVerdict verdict = RateVerdict::fail;
};

inline constexpr double kRateSlack = 0.05;
inline constexpr double kStrictDecayFactor = 0.9;

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maxima of t^exponent * value over decades [w 10^k, w 10^(k+1)) starting at
/// window_start; needs at least two full decades.
RateCertificate certify_rate(const Series& series, double exponent, double window_start);

/// Same test with an arbitrary weight and caller-chosen window edges
/// (consecutive pairs).  Used for exponential and integrated-b rates.
RateCertificate certify_weighted(const Series& series,
                                 const std::function<double(double)>& weight,
                                 const std::vector<double>& window_edges,
                                 double exponent_label = 0.0);

/// ||p(t_c) - p(t_end)|| at each checkpoint.
Series tail_stabilization(const Run& run, const std::vector<double>& checkpoints);

/// Largest distance of any node position from the initial or the final
/// position.
double trajectory_extent(const Run& run);

/// First node time after which gamma/mu and mu'/mu stay within 1% of their
/// values at the horizon.
double detect_burn_in(const SystemSpec& hb_operator_spec, double horizon);

/// Integral of b over [(t + t0)/2, t] in closed form for the exponential,
/// polynomial and constant families.
double integrated_scaling(const Scaling& b, double t0, double t);

}  // namespace inertial
