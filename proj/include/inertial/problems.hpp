#pragma once

#include "inertial/core.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

namespace inertial {

using Params = nlohmann::json;

/// Smooth convex objective with analytic oracles.
struct ScalarProblem {
  std::string id;
  int dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double inf_value = 0.0;
  std::optional<Vector> minimizer;
  std::optional<double> grad_lipschitz;
};

/// Continuous vector field, monotone for every catalog entry except the
/// negated identity.
struct OperatorProblem {
  std::string id;
  int dim = 0;
  std::function<Vector(const Vector&)> apply;
  std::optional<Vector> zero;
  double lipschitz = 0.0;
};

/// Catalog ids: quadratic, least_squares, logsumexp, huberized_norm.
///
/// Parameters (all optional unless noted):
///   quadratic       spectrum [dim], center [dim]
///   least_squares   A (rows x dim nested array), b [rows], rows (when A is drawn)
///   logsumexp       A (rows x dim), center [dim], rows
///   huberized_norm  delta > 0, center [dim]
/// Random entries are drawn from the seed; the result is deterministic in
/// (id, dim, params, seed).
ScalarProblem build_scalar_problem(const std::string& catalog_id, int dim,
                                   const Params& params, std::uint64_t seed);

/// Catalog ids: rotation, bilinear_saddle, affine_monotone,
/// gradient_as_operator, negated_identity_for_tests.
///
///   rotation         omega > 0 (default 1); dim must be even
///   bilinear_saddle  A (n x m, n + m == dim) or n (rows, default dim/2)
///   affine_monotone  sym_weight >= 0 (default 1), skew_scale (default 1), center
///   gradient_as_operator  function {id, params}
OperatorProblem build_operator_problem(const std::string& catalog_id, int dim,
                                       const Params& params,
                                       std::uint64_t seed);

struct MonotonicityReport {
  bool pass = false;
  double worst_inner_product = 0.0;
  std::pair<Vector, Vector> witness;
};

/// Samples pairs uniformly from [-5, 5]^dim and reports the smallest
/// <V(y) - V(x), y - x>.
MonotonicityReport check_monotone(const OperatorProblem& problem, int samples,
                                  std::uint64_t seed, double tol);

/// Same sampling for <grad f(y) - grad f(x), y - x>.
MonotonicityReport check_convex(const ScalarProblem& problem, int samples,
                                std::uint64_t seed, double tol);

/// Largest observed ||V(y) - V(x)|| / ||y - x|| over sampled pairs.
double sampled_lipschitz_ratio(const OperatorProblem& problem, int samples,
                               std::uint64_t seed);

OperatorProblem gradient_operator(std::shared_ptr<const ScalarProblem> f);

}  // namespace inertial
