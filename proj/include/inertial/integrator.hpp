#pragma once

#include "inertial/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace inertial {

template <typename Scalar>
using Field = std::function<Vec<Scalar>(Scalar, const Vec<Scalar>&)>;

struct Rk4Fixed {
  double h = 1e-3;
};

// Embedded 5(4) pair with PI step control.
struct DormandPrince {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_init = 1e-3;
  double h_max = 1.0;
};

struct IntegratorControls {
  std::variant<Rk4Fixed, DormandPrince> method = DormandPrince{};
  long max_steps = 5'000'000;
  std::vector<double> sample_times;
};

template <typename Scalar>
struct Node {
  Scalar t;
  Vec<Scalar> z;
  Vec<Scalar> dz;
};

template <typename Scalar>
struct Sample {
  Scalar t;
  Vec<Scalar> z;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

/// Accepted nodes of an integration, each carrying the field value at the
/// node so the curve can be evaluated densely.
template <typename Scalar>
struct Trajectory {
  std::vector<Node<Scalar>> nodes;
  std::vector<Sample<Scalar>> samples;
  IntegratorControls controls;
  IntegrationStats stats;

  Scalar start_time() const { return nodes.front().t; }
  Scalar end_time() const { return nodes.back().t; }
  Eigen::Index state_size() const { return nodes.front().z.size(); }
};

class IntegrationError : public std::runtime_error {
 public:
  enum class Kind { max_steps_exceeded, step_size_underflow, non_finite_state };

  IntegrationError(Kind kind, double last_good_time, Vector last_good_state,
                   const std::string& what)
      : std::runtime_error(what),
        kind_(kind),
        last_good_time_(last_good_time),
        last_good_state_(std::move(last_good_state)) {}

  Kind kind() const { return kind_; }
  double last_good_time() const { return last_good_time_; }
  const Vector& last_good_state() const { return last_good_state_; }

 private:
  Kind kind_;
  double last_good_time_;
  Vector last_good_state_;
};

/// Cubic Hermite interpolation between the bracketing nodes.  Exact at node
/// times; no extrapolation.
template <typename Scalar>
Vec<Scalar> dense_eval(const Trajectory<Scalar>& traj, Scalar t) {
  const auto& nodes = traj.nodes;
  if (nodes.empty()) throw RangeError("dense_eval: empty trajectory");
  if (!(t >= nodes.front().t && t <= nodes.back().t)) {
    throw RangeError("dense_eval: t = " + std::to_string(double(t)) +
                     " outside [" + std::to_string(double(nodes.front().t)) +
                     ", " + std::to_string(double(nodes.back().t)) + "]");
  }
  auto it = std::upper_bound(nodes.begin(), nodes.end(), t,
                             [](Scalar v, const Node<Scalar>& n) { return v < n.t; });
  if (it == nodes.begin()) return nodes.front().z;
  const auto& left = *(it - 1);
  if (left.t == t || it == nodes.end()) return left.z;
  const auto& right = *it;
  const Scalar h = right.t - left.t;
  const Scalar s = (t - left.t) / h;
  const Scalar s2 = s * s;
  const Scalar s3 = s2 * s;
  const Scalar h00 = 2 * s3 - 3 * s2 + 1;
  const Scalar h10 = s3 - 2 * s2 + s;
  const Scalar h01 = -2 * s3 + 3 * s2;
  const Scalar h11 = s3 - s2;
  return h00 * left.z + (h10 * h) * left.dz + h01 * right.z + (h11 * h) * right.dz;
}

template <typename Scalar>
State<Scalar> dense_state(const Trajectory<Scalar>& traj, Scalar t) {
  return unstack(t, dense_eval(traj, t));
}

namespace detail {

template <typename Scalar>
void check_finite(const Vec<Scalar>& z, Scalar t, const Trajectory<Scalar>& traj) {
  if (!z.allFinite()) {
    const auto& last = traj.nodes.back();
    throw IntegrationError(IntegrationError::Kind::non_finite_state, double(last.t),
                           last.z.template cast<double>(),
                           "non-finite state at t = " + std::to_string(double(t)));
  }
}

template <typename Scalar>
void fill_samples(Trajectory<Scalar>& traj) {
  const auto& times = traj.controls.sample_times;
  traj.samples.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw DomainError("sample_times must be strictly ascending");
    }
    traj.samples.push_back({Scalar(times[i]), dense_eval(traj, Scalar(times[i]))});
  }
}

template <typename Scalar>
void integrate_rk4(const Field<Scalar>& field, Trajectory<Scalar>& traj,
                   Scalar t_end, double h) {
  if (!(h > 0.0)) throw DomainError("rk4_fixed: h must be positive");
  const Scalar t_start = traj.nodes.front().t;
  const auto steps =
      static_cast<long>(std::ceil(double(t_end - t_start) / h - 1e-9));
  if (steps > traj.controls.max_steps) {
    const auto& first = traj.nodes.front();
    throw IntegrationError(IntegrationError::Kind::max_steps_exceeded, double(first.t),
                           first.z.template cast<double>(),
                           "rk4_fixed needs " + std::to_string(steps) +
                               " steps, max_steps is " +
                               std::to_string(traj.controls.max_steps));
  }
  traj.nodes.reserve(steps + 1);
  for (long k = 0; k < steps; ++k) {
    const auto& cur = traj.nodes.back();
    const Scalar t = cur.t;
    const Scalar t_next = (k + 1 == steps) ? t_end : t_start + Scalar(h) * Scalar(k + 1);
    const Scalar step = t_next - t;
    const Vec<Scalar>& z = cur.z;
    const Vec<Scalar>& k1 = cur.dz;
    const Vec<Scalar> k2 = field(t + step / 2, z + (step / 2) * k1);
    const Vec<Scalar> k3 = field(t + step / 2, z + (step / 2) * k2);
    const Vec<Scalar> k4 = field(t + step, z + step * k3);
    Vec<Scalar> z_next = z + (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    check_finite(z_next, t_next, traj);
    Vec<Scalar> dz_next = field(t_next, z_next);
    traj.stats.evaluations += 4;
    ++traj.stats.accepted;
    traj.nodes.push_back({t_next, std::move(z_next), std::move(dz_next)});
  }
}

template <typename Scalar>
void integrate_dopri(const Field<Scalar>& field, Trajectory<Scalar>& traj,
                     Scalar t_end, const DormandPrince& dp) {
  if (!(dp.rtol > 0.0) || !(dp.atol > 0.0) || !(dp.h_init > 0.0) || !(dp.h_max > 0.0)) {
    throw DomainError("dormand_prince: rtol, atol, h_init and h_max must be positive");
  }
  constexpr Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10, c4 = Scalar(4) / 5,
                   c5 = Scalar(8) / 9;
  constexpr Scalar a21 = Scalar(1) / 5;
  constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
  constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15, a43 = Scalar(32) / 9;
  constexpr Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187,
                   a53 = Scalar(64448) / 6561, a54 = Scalar(-212) / 729;
  constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33,
                   a63 = Scalar(46732) / 5247, a64 = Scalar(49) / 176,
                   a65 = Scalar(-5103) / 18656;
  constexpr Scalar b1 = Scalar(35) / 384, b3 = Scalar(500) / 1113, b4 = Scalar(125) / 192,
                   b5 = Scalar(-2187) / 6784, b6 = Scalar(11) / 84;
  constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695,
                   e4 = Scalar(71) / 1920, e5 = Scalar(-17253) / 339200,
                   e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;
  constexpr double safety = 0.9;
  constexpr double k_integral = 0.7 / 4.0;
  constexpr double k_proportional = 0.4 / 4.0;
  constexpr double min_ratio = 0.2;
  constexpr double max_ratio = 5.0;

  const Scalar t_start = traj.nodes.front().t;
  const Scalar span = t_end - t_start;
  const Scalar h_min = Scalar(1e-14) * span;
  Scalar h = std::min<Scalar>(Scalar(dp.h_init), Scalar(dp.h_max));
  double err_prev = 1.0;
  bool last_rejected = false;
  long attempts = 0;

  while (traj.nodes.back().t < t_end) {
    const auto& cur = traj.nodes.back();
    const Scalar t = cur.t;
    if (++attempts > traj.controls.max_steps) {
      throw IntegrationError(IntegrationError::Kind::max_steps_exceeded, double(t),
                             cur.z.template cast<double>(),
                             "max_steps exceeded at t = " + std::to_string(double(t)));
    }
    bool final_step = false;
    if (t + h >= t_end || t_end - (t + h) < h_min) {
      h = t_end - t;
      final_step = true;
    }
    if (h < h_min) {
      throw IntegrationError(IntegrationError::Kind::step_size_underflow, double(t),
                             cur.z.template cast<double>(),
                             "step size underflow at t = " + std::to_string(double(t)));
    }

    const Vec<Scalar>& z = cur.z;
    const Vec<Scalar>& k1 = cur.dz;
    const Vec<Scalar> k2 = field(t + c2 * h, z + h * (a21 * k1));
    const Vec<Scalar> k3 = field(t + c3 * h, z + h * (a31 * k1 + a32 * k2));
    const Vec<Scalar> k4 = field(t + c4 * h, z + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec<Scalar> k5 =
        field(t + c5 * h, z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Scalar t_new = final_step ? t_end : t + h;
    const Vec<Scalar> k6 =
        field(t_new, z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vec<Scalar> z_new = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vec<Scalar> k7 = field(t_new, z_new);
    traj.stats.evaluations += 6;

    const Vec<Scalar> err_vec =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const Vec<Scalar> scale =
        (Scalar(dp.atol) + Scalar(dp.rtol) * z.cwiseAbs().cwiseMax(z_new.cwiseAbs()).array())
            .matrix();
    double err = std::sqrt(double((err_vec.array() / scale.array()).square().mean()));
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      check_finite(z_new, t_new, traj);
      double ratio = err == 0.0
                         ? max_ratio
                         : safety * std::pow(err, -k_integral) * std::pow(err_prev, k_proportional);
      ratio = std::clamp(ratio, min_ratio, max_ratio);
      if (last_rejected) ratio = std::min(ratio, 1.0);
      err_prev = std::max(err, 1e-4);
      ++traj.stats.accepted;
      traj.nodes.push_back({t_new, std::move(z_new), std::move(k7)});
      if (final_step) break;
      h = std::min<Scalar>(h * Scalar(ratio), Scalar(dp.h_max));
      last_rejected = false;
    } else {
      ++traj.stats.rejected;
      const double ratio = std::max(min_ratio, safety * std::pow(err, -0.2));
      h *= Scalar(ratio);
      last_rejected = true;
    }
  }
}

}  // namespace detail

/// Integrates z' = field(t, z) from (t_start, z0) to t_end.
template <typename Scalar>
Trajectory<Scalar> integrate(const Field<Scalar>& field, Scalar t_start,
                             const Vec<Scalar>& z0, Scalar t_end,
                             const IntegratorControls& controls) {
  if (!(t_end > t_start)) throw DomainError("integrate: t_end must exceed t_start");
  if (controls.max_steps <= 0) throw DomainError("integrate: max_steps must be positive");
  for (double s : controls.sample_times) {
    if (s < double(t_start) || s > double(t_end)) {
      throw DomainError("integrate: sample time " + std::to_string(s) +
                        " outside the integration window");
    }
  }
  Trajectory<Scalar> traj;
  traj.controls = controls;
  traj.nodes.push_back({t_start, z0, field(t_start, z0)});
  traj.stats.evaluations = 1;
  detail::check_finite(traj.nodes.front().dz, t_start, traj);

  std::visit(
      [&](const auto& method) {
        using M = std::decay_t<decltype(method)>;
        if constexpr (std::is_same_v<M, Rk4Fixed>) {
          detail::integrate_rk4(field, traj, t_end, method.h);
        } else {
          detail::integrate_dopri(field, traj, t_end, method);
        }
      },
      controls.method);

  detail::fill_samples(traj);
  return traj;
}

}  // namespace inertial
