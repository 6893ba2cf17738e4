#include "inertial/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace inertial {

namespace {

constexpr double kSampleBox = 5.0;

Vector read_vector(const Params& params, const char* key, int expected) {
  const auto& node = params.at(key);
  if (!node.is_array()) {
    throw DomainError(std::string("parameter '") + key + "' must be an array");
  }
  if (static_cast<int>(node.size()) != expected) {
    throw DomainError(std::string("parameter '") + key + "' has length " +
                      std::to_string(node.size()) + ", expected " +
                      std::to_string(expected));
  }
  Vector v(expected);
  for (int i = 0; i < expected; ++i) v[i] = node[i].get<double>();
  return v;
}

Matrix read_matrix(const Params& params, const char* key) {
  const auto& node = params.at(key);
  if (!node.is_array() || node.empty() || !node[0].is_array()) {
    throw DomainError(std::string("parameter '") + key +
                      "' must be a nested array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(node.size());
  const auto cols = static_cast<Eigen::Index>(node[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(node[i].size()) != cols) {
      throw DomainError(std::string("parameter '") + key + "' is ragged");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = node[i][j].get<double>();
  }
  return m;
}

double read_scalar(const Params& params, const char* key, double fallback) {
  if (!params.is_object() || !params.contains(key)) return fallback;
  return params.at(key).get<double>();
}

bool has(const Params& params, const char* key) {
  return params.is_object() && params.contains(key);
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

Vector uniform_vector(Eigen::Index n, double lo, double hi,
                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = unif(rng);
  return v;
}

double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
}

void require_dim(const Vector& x, int dim, const char* who) {
  if (x.size() != dim) {
    throw DomainError(std::string(who) + ": point has dimension " +
                      std::to_string(x.size()) + ", expected " +
                      std::to_string(dim));
  }
}

ScalarProblem make_quadratic(int dim, const Params& params) {
  Vector spectrum(dim);
  if (has(params, "spectrum")) {
    spectrum = read_vector(params, "spectrum", dim);
  } else {
    for (int i = 0; i < dim; ++i) spectrum[i] = double(i + 1) / dim;
  }
  if ((spectrum.array() < 0.0).any()) {
    throw DomainError("quadratic: spectrum must be nonnegative (PSD)");
  }
  Vector center =
      has(params, "center") ? read_vector(params, "center", dim) : Vector::Zero(dim);

  ScalarProblem p;
  p.id = "quadratic";
  p.dim = dim;
  p.value = [=](const Vector& x) {
    require_dim(x, dim, "quadratic");
    return 0.5 * (spectrum.array() * (x - center).array().square()).sum();
  };
  p.gradient = [=](const Vector& x) -> Vector {
    require_dim(x, dim, "quadratic");
    return spectrum.cwiseProduct(x - center);
  };
  p.inf_value = 0.0;
  p.minimizer = center;
  if (spectrum.maxCoeff() > 0.0) p.grad_lipschitz = spectrum.maxCoeff();
  return p;
}

ScalarProblem make_least_squares(int dim, const Params& params,
                                 std::mt19937_64& rng) {
  Matrix a;
  if (has(params, "A")) {
    a = read_matrix(params, "A");
    if (a.cols() != dim) {
      throw DomainError("least_squares: A has " + std::to_string(a.cols()) +
                        " columns, expected " + std::to_string(dim));
    }
  } else {
    const auto rows = static_cast<Eigen::Index>(read_scalar(params, "rows", dim + 1));
    a = gaussian_matrix(rows, dim, rng);
  }
  Vector b = has(params, "b") ? read_vector(params, "b", static_cast<int>(a.rows()))
                              : gaussian_matrix(a.rows(), 1, rng).col(0);

  ScalarProblem p;
  p.id = "least_squares";
  p.dim = dim;
  p.value = [=](const Vector& x) {
    require_dim(x, dim, "least_squares");
    return 0.5 * (a * x - b).squaredNorm();
  };
  p.gradient = [=](const Vector& x) -> Vector {
    require_dim(x, dim, "least_squares");
    return a.transpose() * (a * x - b);
  };
  Vector xmin = a.completeOrthogonalDecomposition().solve(b);
  p.minimizer = xmin;
  p.inf_value = p.value(xmin);
  const double s = spectral_norm(a);
  if (s > 0.0) p.grad_lipschitz = s * s;
  return p;
}

ScalarProblem make_logsumexp(int dim, const Params& params,
                             std::mt19937_64& rng) {
  Matrix a;
  if (has(params, "A")) {
    a = read_matrix(params, "A");
    if (a.cols() != dim) {
      throw DomainError("logsumexp: A has " + std::to_string(a.cols()) +
                        " columns, expected " + std::to_string(dim));
    }
  } else {
    const auto rows = static_cast<Eigen::Index>(read_scalar(params, "rows", dim + 1));
    a = gaussian_matrix(rows, dim, rng);
  }
  Vector center = has(params, "center") ? read_vector(params, "center", dim)
                                        : uniform_vector(dim, -1.0, 1.0, rng);
  const double offset = std::log(2.0 * double(a.rows()));

  // f(x) = log sum_i (exp(w_i) + exp(-w_i)) - log(2m),  w = A (x - c).
  // Symmetric in w, so x = c is a minimizer with f(c) = 0.
  ScalarProblem p;
  p.id = "logsumexp";
  p.dim = dim;
  p.value = [=](const Vector& x) {
    require_dim(x, dim, "logsumexp");
    const Vector w = a * (x - center);
    const double shift = w.cwiseAbs().maxCoeff();
    const double sum = ((w.array() - shift).exp() + (-w.array() - shift).exp()).sum();
    return shift + std::log(sum) - offset;
  };
  p.gradient = [=](const Vector& x) -> Vector {
    require_dim(x, dim, "logsumexp");
    const Vector w = a * (x - center);
    const double shift = w.cwiseAbs().maxCoeff();
    const Eigen::ArrayXd plus = (w.array() - shift).exp();
    const Eigen::ArrayXd minus = (-w.array() - shift).exp();
    const double sum = plus.sum() + minus.sum();
    const Vector weights = ((plus - minus) / sum).matrix();
    return a.transpose() * weights;
  };
  p.inf_value = 0.0;
  p.minimizer = center;
  const double s = spectral_norm(a);
  p.grad_lipschitz = s * s;
  return p;
}

ScalarProblem make_huberized_norm(int dim, const Params& params) {
  const double delta = read_scalar(params, "delta", 1.0);
  if (!(delta > 0.0)) throw DomainError("huberized_norm: delta must be positive");
  Vector center =
      has(params, "center") ? read_vector(params, "center", dim) : Vector::Zero(dim);

  // Pseudo-Huber: quadratic near the center, asymptotically linear.
  ScalarProblem p;
  p.id = "huberized_norm";
  p.dim = dim;
  p.value = [=](const Vector& x) {
    require_dim(x, dim, "huberized_norm");
    const double r2 = (x - center).squaredNorm() / (delta * delta);
    return delta * delta * r2 / (std::sqrt(1.0 + r2) + 1.0);
  };
  p.gradient = [=](const Vector& x) -> Vector {
    require_dim(x, dim, "huberized_norm");
    const double r2 = (x - center).squaredNorm() / (delta * delta);
    return (x - center) / std::sqrt(1.0 + r2);
  };
  p.inf_value = 0.0;
  p.minimizer = center;
  p.grad_lipschitz = 1.0;
  return p;
}

OperatorProblem make_linear_operator(std::string id, int dim, Matrix m,
                                     Vector center) {
  OperatorProblem op;
  op.id = std::move(id);
  op.dim = dim;
  op.lipschitz = spectral_norm(m);
  op.zero = center;
  const std::string name = op.id;
  op.apply = [m = std::move(m), center = std::move(center), dim,
              name](const Vector& z) -> Vector {
    require_dim(z, dim, name.c_str());
    return m * (z - center);
  };
  return op;
}

}  // namespace

ScalarProblem build_scalar_problem(const std::string& catalog_id, int dim,
                                   const Params& params, std::uint64_t seed) {
  if (dim <= 0) throw DomainError("dimension must be positive");
  std::mt19937_64 rng(seed);
  if (catalog_id == "quadratic") return make_quadratic(dim, params);
  if (catalog_id == "least_squares") return make_least_squares(dim, params, rng);
  if (catalog_id == "logsumexp") return make_logsumexp(dim, params, rng);
  if (catalog_id == "huberized_norm") return make_huberized_norm(dim, params);
  throw DomainError("unknown scalar problem '" + catalog_id + "'");
}

OperatorProblem build_operator_problem(const std::string& catalog_id, int dim,
                                       const Params& params,
                                       std::uint64_t seed) {
  if (dim <= 0) throw DomainError("dimension must be positive");
  std::mt19937_64 rng(seed);

  if (catalog_id == "rotation") {
    if (dim % 2 != 0) throw DomainError("rotation requires an even dimension");
    const double omega = read_scalar(params, "omega", 1.0);
    if (!(omega > 0.0)) throw DomainError("rotation: omega must be positive");
    Matrix j = Matrix::Zero(dim, dim);
    for (int k = 0; k < dim; k += 2) {
      j(k, k + 1) = omega;
      j(k + 1, k) = -omega;
    }
    return make_linear_operator("rotation", dim, std::move(j), Vector::Zero(dim));
  }

  if (catalog_id == "bilinear_saddle") {
    Matrix a;
    if (has(params, "A")) {
      a = read_matrix(params, "A");
      if (a.rows() + a.cols() != dim) {
        throw DomainError("bilinear_saddle: A is " + std::to_string(a.rows()) +
                          "x" + std::to_string(a.cols()) +
                          ", which needs dim " +
                          std::to_string(a.rows() + a.cols()));
      }
    } else {
      if (dim < 2) throw DomainError("bilinear_saddle requires dim >= 2");
      const auto n = static_cast<Eigen::Index>(read_scalar(params, "n", dim / 2));
      if (n <= 0 || n >= dim) throw DomainError("bilinear_saddle: bad block size n");
      a = gaussian_matrix(n, dim - n, rng);
    }
    // V(x, y) = (d/dx, -d/dy) of x^T A y.
    const Eigen::Index n = a.rows();
    const Eigen::Index m = a.cols();
    Matrix field = Matrix::Zero(dim, dim);
    field.topRightCorner(n, m) = a;
    field.bottomLeftCorner(m, n) = -a.transpose();
    return make_linear_operator("bilinear_saddle", dim, std::move(field),
                                Vector::Zero(dim));
  }

  if (catalog_id == "affine_monotone") {
    const double sym = read_scalar(params, "sym_weight", 1.0);
    const double skew = read_scalar(params, "skew_scale", 1.0);
    if (sym < 0.0) throw DomainError("affine_monotone: sym_weight must be >= 0");
    const Matrix g = gaussian_matrix(dim, dim, rng);
    Matrix m = sym * Matrix::Identity(dim, dim) + skew * 0.5 * (g - g.transpose());
    Vector center = has(params, "center") ? read_vector(params, "center", dim)
                                          : Vector::Zero(dim);
    return make_linear_operator("affine_monotone", dim, std::move(m),
                                std::move(center));
  }

  if (catalog_id == "gradient_as_operator") {
    if (!has(params, "function")) {
      throw DomainError("gradient_as_operator: missing 'function'");
    }
    const auto& fn = params.at("function");
    const Params inner = fn.contains("params") ? fn.at("params") : Params::object();
    auto f = std::make_shared<const ScalarProblem>(
        build_scalar_problem(fn.at("id").get<std::string>(), dim, inner, seed));
    return gradient_operator(std::move(f));
  }

  if (catalog_id == "negated_identity_for_tests") {
    return make_linear_operator("negated_identity_for_tests", dim,
                                -Matrix::Identity(dim, dim), Vector::Zero(dim));
  }

  throw DomainError("unknown operator problem '" + catalog_id + "'");
}

OperatorProblem gradient_operator(std::shared_ptr<const ScalarProblem> f) {
  if (!f->grad_lipschitz) {
    throw DomainError("gradient_as_operator: wrapped function has no Lipschitz bound");
  }
  OperatorProblem op;
  op.id = "gradient_as_operator";
  op.dim = f->dim;
  op.zero = f->minimizer;
  op.lipschitz = *f->grad_lipschitz;
  op.apply = [f](const Vector& z) { return f->gradient(z); };
  return op;
}

namespace {

template <typename Field>
MonotonicityReport sample_pairs(int dim, const Field& field, int samples,
                                std::uint64_t seed, double tol) {
  if (samples < 1) throw DomainError("samples must be >= 1");
  std::mt19937_64 rng(seed);
  MonotonicityReport report;
  report.worst_inner_product = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    Vector x = uniform_vector(dim, -kSampleBox, kSampleBox, rng);
    Vector y = uniform_vector(dim, -kSampleBox, kSampleBox, rng);
    const double ip = (field(y) - field(x)).dot(y - x);
    if (ip < report.worst_inner_product) {
      report.worst_inner_product = ip;
      report.witness = {std::move(x), std::move(y)};
    }
  }
  report.pass = report.worst_inner_product >= -tol;
  return report;
}

}  // namespace

MonotonicityReport check_monotone(const OperatorProblem& problem, int samples,
                                  std::uint64_t seed, double tol) {
  return sample_pairs(problem.dim, problem.apply, samples, seed, tol);
}

MonotonicityReport check_convex(const ScalarProblem& problem, int samples,
                                std::uint64_t seed, double tol) {
  return sample_pairs(problem.dim, problem.gradient, samples, seed, tol);
}

double sampled_lipschitz_ratio(const OperatorProblem& problem, int samples,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Vector x = uniform_vector(problem.dim, -kSampleBox, kSampleBox, rng);
    const Vector y = uniform_vector(problem.dim, -kSampleBox, kSampleBox, rng);
    const double gap = (y - x).norm();
    if (gap == 0.0) continue;
    worst = std::max(worst, (problem.apply(y) - problem.apply(x)).norm() / gap);
  }
  return worst;
}

}  // namespace inertial
