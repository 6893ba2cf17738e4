#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "inertial/dynamics.hpp"
#include "inertial/rescaling.hpp"

#include <cmath>
#include <random>

using namespace inertial;
using nlohmann::json;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

std::shared_ptr<const ScalarProblem> quadratic(int dim) {
  json spectrum = json::array();
  for (int i = 0; i < dim; ++i) spectrum.push_back(1.0);
  return std::make_shared<const ScalarProblem>(
      build_scalar_problem("quadratic", dim, {{"spectrum", spectrum}}, 0));
}

std::shared_ptr<const ScalarProblem> scalar(const std::string& id, int dim) {
  return std::make_shared<const ScalarProblem>(build_scalar_problem(id, dim, json::object(), 1));
}

std::shared_ptr<const OperatorProblem> rotation() {
  return std::make_shared<const OperatorProblem>(
      build_operator_problem("rotation", 2, json::object(), 0));
}

std::shared_ptr<const OperatorProblem> saddle() {
  return std::make_shared<const OperatorProblem>(
      build_operator_problem("bilinear_saddle", 4, json::object(), 2));
}

IntegratorControls tight() {
  IntegratorControls c;
  c.method = DormandPrince{1e-11, 1e-13, 1e-3, 0.25};
  return c;
}

Vector split_p(const Vector& z) { return z.head(z.size() / 2); }
Vector split_u(const Vector& z) { return z.tail(z.size() / 2); }

}  // namespace

TEST_CASE("variant names") {
  for (auto v : {Variant::HBF_function, Variant::AVD_function, Variant::HB_operator,
                 Variant::FOGDA_operator}) {
    CHECK(variant_from_string(to_string(v)) == v);
  }
  CHECK_THROWS_AS(variant_from_string("HBF"), DomainError);
}

TEST_CASE("HBF field, hand evaluation") {
  const auto spec = SystemSpec::hbf(quadratic(1), 2.0, Scaling::constant(1.0), 0.0, vec({1}), vec({0}));
  const Vector d = hbf_rhs(spec)(0.0, vec({1.0, 2.0}));
  CHECK(d[0] == doctest::Approx(0.0));
  CHECK(d[1] == doctest::Approx(-1.0));
  CHECK(initial_auxiliary(spec)[0] == doctest::Approx(2.0));
}

TEST_CASE("AVD field, hand evaluation") {
  const auto spec = SystemSpec::avd(quadratic(1), 4.0, 1.0, vec({1}), vec({0}));
  const Vector d = avd_rhs(spec)(2.0, vec({1.0, 1.0}));
  CHECK(d[0] == doctest::Approx(1.0));
  CHECK(d[1] == doctest::Approx(-3.0));
  CHECK_THROWS_AS(avd_rhs(spec)(0.0, vec({1.0, 1.0})), DomainError);
  CHECK_THROWS_AS(avd_rhs(spec)(-1.0, vec({1.0, 1.0})), DomainError);
}

TEST_CASE("HB operator field, hand evaluation") {
  const auto mu = Scaling::special_operator_case(4.0, 1.0, 0.0);
  const auto spec = SystemSpec::hb_operator(rotation(), 1.5, mu, mu, 0.0, vec({1, 0}), vec({0, 0}));
  const Vector d = hbop_rhs(spec)(0.0, vec({1.0, 0.0, 1.5, -0.5}));
  CHECK(std::abs(d[0]) <= 1e-15);
  CHECK(std::abs(d[1]) <= 1e-15);
  CHECK(std::abs(d[2]) <= 1e-15);
  CHECK(d[3] == doctest::Approx(0.25));
  // u0 = lambda y0 + y1 + mu(t0) V(y0)
  const Vector u0 = initial_auxiliary(spec);
  CHECK(u0[0] == doctest::Approx(1.5));
  CHECK(u0[1] == doctest::Approx(-0.5));
}

TEST_CASE("HB operator with mu' = gamma has a constant auxiliary variable") {
  const auto mu = Scaling::exponential(1.0, 1.0);
  const auto spec = SystemSpec::hb_operator(rotation(), 2.0, mu, mu, 0.0, vec({1, 0}), vec({0, 0}));
  const auto f = hbop_rhs(spec);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N;
  for (int k = 0; k < 20; ++k) {
    const Vector d = f(0.1 * k, vec({N(rng), N(rng), N(rng), N(rng)}));
    CHECK(split_u(d).norm() <= 1e-12 * (1.0 + std::exp(0.1 * k)));
  }
}

TEST_CASE("FOGDA field, hand evaluation") {
  const auto spec = SystemSpec::fogda(rotation(), 4.0, 1.0, vec({1, 0}), vec({0, 0}));
  const Vector d = fogda_rhs(spec)(1.0, vec({1.0, 0.0, 0.0, 0.0}));
  CHECK(d[0] == doctest::Approx(0.0));
  CHECK(d[1] == doctest::Approx(1.0));
  CHECK(d[2] == doctest::Approx(0.0));
  CHECK(d[3] == doctest::Approx(-2.0));
  CHECK_THROWS_AS(fogda_rhs(spec)(0.0, vec({1.0, 0.0, 0.0, 0.0})), DomainError);
}

TEST_CASE("equilibria are fixed points of every field") {
  const auto f = scalar("logsumexp", 3);
  const Vector xs = *f.get()->minimizer;
  const Vector zero3 = Vector::Zero(3);
  {
    const auto spec = SystemSpec::hbf(f, 1.0, Scaling::exponential(1.0, 0.5), 0.0, xs, zero3);
    CHECK(make_field(spec)(3.0, initial_state(spec)).norm() <= 1e-13);
  }
  {
    const auto spec = SystemSpec::avd(f, 5.0, 1.0, xs, zero3);
    CHECK(make_field(spec)(3.0, initial_state(spec)).norm() <= 1e-13);
  }
  const auto v = saddle();
  const Vector zs = *v->zero;
  const Vector zero4 = Vector::Zero(4);
  {
    const auto mu = Scaling::special_operator_case(4.0, 1.0, 0.0);
    const auto spec = SystemSpec::hb_operator(v, 1.5, mu, mu, 0.0, zs, zero4);
    CHECK(make_field(spec)(3.0, initial_state(spec)).norm() <= 1e-13);
  }
  {
    const auto spec = SystemSpec::fogda(v, 4.0, 1.0, zs, zero4);
    CHECK(make_field(spec)(3.0, initial_state(spec)).norm() <= 1e-13);
  }
}

TEST_CASE("spec validation") {
  const auto f = quadratic(1);
  CHECK_THROWS_AS(SystemSpec::avd(f, 3.0, 1.0, vec({1}), vec({0})), DomainError);
  CHECK_THROWS_AS(SystemSpec::avd(f, 4.0, 0.0, vec({1}), vec({0})), DomainError);
  CHECK_THROWS_AS(SystemSpec::fogda(rotation(), 2.0, 1.0, vec({1, 0}), vec({0, 0})), DomainError);
  CHECK_THROWS_AS(SystemSpec::hbf(f, 1.0, Scaling::polynomial(1.0, 2.0), 0.0, vec({1}), vec({0})),
                  DomainError);
  CHECK_THROWS_AS(SystemSpec::hbf(f, 0.0, Scaling::constant(1.0), 0.0, vec({1}), vec({0})),
                  DomainError);
  CHECK_THROWS_AS(SystemSpec::hbf(f, 1.0, Scaling::constant(1.0), 0.0, vec({1, 2}), vec({0})),
                  DomainError);
  SystemSpec incomplete;
  incomplete.variant = Variant::HB_operator;
  incomplete.lambda = 1.0;
  incomplete.op = rotation();
  incomplete.y0 = vec({1, 0});
  incomplete.y1 = vec({0, 0});
  CHECK_THROWS_AS(incomplete.validate(), DomainError);
}

TEST_CASE("velocity recovery per variant") {
  const Vector p = vec({1.0, 2.0}), u = vec({3.0, -1.0});
  const auto hbf = SystemSpec::hbf(quadratic(2), 2.0, Scaling::constant(1.0), 0.0, p, p);
  CHECK((velocity(hbf, 0.0, p, u) - (u - 2.0 * p)).norm() == 0.0);
  const auto avd = SystemSpec::avd(quadratic(2), 4.0, 1.0, p, p);
  CHECK((velocity(avd, 1.0, p, u) - u).norm() == 0.0);
  const auto mu = Scaling::exponential(2.0, 0.1);
  const auto hbop = SystemSpec::hb_operator(rotation(), 2.0, mu, mu, 0.0, p, p);
  const Vector vp = rotation()->apply(p);
  CHECK((velocity(hbop, 1.0, p, u) - (u - 2.0 * p - mu.value(1.0) * vp)).norm() <= 1e-14);
  const auto fogda = SystemSpec::fogda(rotation(), 4.0, 1.0, p, p);
  CHECK((velocity(fogda, 1.0, p, u) - (u - vp)).norm() <= 1e-15);
}

TEST_CASE("second-order residuals along integrated trajectories") {
  const double h = 1e-4;
  auto check_run = [&](const SystemSpec& spec, double t_end, auto residual) {
    const Run run = simulate(spec, t_end, tight());
    const double t0 = spec.start_time;
    for (int k = 1; k <= 50; ++k) {
      const double t = t0 + (t_end - t0) * k / 51.0;
      const State<double> st = run.state_at(t);
      const Vector v = run.velocity_at(t);
      const Vector acc = (run.velocity_at(t + h) - run.velocity_at(t - h)) / (2.0 * h);
      const Vector r = residual(t, st.p, v, acc, run);
      CHECK(r.norm() <= 1e-5 * (1.0 + st.p.norm() + v.norm()));
    }
  };

  SUBCASE("HBF") {
    const auto f = scalar("logsumexp", 2);
    const auto b = Scaling::exponential(1.0, 0.5);
    const auto spec = SystemSpec::hbf(f, 1.0, b, 0.0, vec({1.0, -2.0}), vec({0.5, 0.0}));
    check_run(spec, 10.0, [&](double t, const Vector& y, const Vector& v, const Vector& a, const Run&) {
      return Vector(a + 1.0 * v + b.value(t) * f->gradient(y));
    });
  }
  SUBCASE("AVD") {
    const auto f = scalar("least_squares", 2);
    const auto spec = SystemSpec::avd(f, 4.0, 1.0, vec({1.0, -2.0}), vec({0.5, 0.0}));
    check_run(spec, 20.0, [&](double s, const Vector& x, const Vector& v, const Vector& a, const Run&) {
      return Vector(a + (4.0 / s) * v + f->gradient(x));
    });
  }
  SUBCASE("HB operator") {
    const auto v = rotation();
    const auto mu = Scaling::special_operator_case(4.0, 1.0, 0.0);
    const auto spec = SystemSpec::hb_operator(v, 1.5, mu, mu, 0.0, vec({1.0, 0.5}), vec({0.0, 0.2}));
    check_run(spec, 6.0, [&](double t, const Vector& y, const Vector& yd, const Vector& a, const Run& run) {
      const Vector dv = (v->apply(run.state_at(t + h).p) - v->apply(run.state_at(t - h).p)) / (2 * h);
      return Vector(a + 1.5 * yd + mu.value(t) * dv + mu.value(t) * v->apply(y));
    });
  }
  SUBCASE("FOGDA") {
    const auto v = saddle();
    const auto spec = SystemSpec::fogda(v, 4.0, 1.0, vec({1.0, 0.5, -1.0, 0.3}), vec({0.0, 0.2, 0.0, 0.1}));
    check_run(spec, 30.0, [&](double s, const Vector& x, const Vector& xd, const Vector& a, const Run& run) {
      const Vector dv = (v->apply(run.state_at(s + h).p) - v->apply(run.state_at(s - h).p)) / (2 * h);
      return Vector(a + (4.0 / s) * xd + dv + (2.0 / s) * v->apply(x));
    });
  }
}

TEST_CASE("AVD field equals the rescaled HBF field") {
  const double alpha = 4.0, lambda = 1.0, s0 = 1.0, t0 = 0.0;
  const auto f = scalar("logsumexp", 2);
  const auto avd = SystemSpec::avd(f, alpha, s0, vec({1, 1}), vec({0, 0}));
  const auto b = special_b(alpha, lambda, s0, t0);
  const auto hbf = SystemSpec::hbf(f, lambda, b, t0, vec({1, 1}), vec({0, 0}));
  const auto map = TimeMap::function_case(alpha, lambda, s0, t0);
  const auto F_avd = avd_rhs(avd);
  const auto F_hbf = hbf_rhs(hbf);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  for (int k = 0; k < 20; ++k) {
    const double s = s0 * std::exp(0.2 * k);
    const Vector x = vec({N(rng), N(rng)}), xd = vec({N(rng), N(rng)});
    const Vector xdd = split_u(F_avd(s, stack<double>(x, xd)));
    const double t = map.tau(s);
    const Vector yd = xd / map.tau_dot(s);
    const Vector dh = F_hbf(t, stack<double>(x, Vector(lambda * x + yd)));
    const Vector ydd = split_u(dh) - lambda * split_p(dh);
    const Vector chain = map.tau_ddot(s) * yd + map.tau_dot(s) * map.tau_dot(s) * ydd;
    CHECK((chain - xdd).norm() <= 1e-10 * (1.0 + xdd.norm()));
  }
}

TEST_CASE("function-case assumption examples") {
  auto r = validate_assumption_function(1.0, Scaling::exponential(1.0, 0.5), 0.0, 100.0);
  CHECK(r.pass);
  CHECK(r.quantities.at("sup_b_dot_over_b") == doctest::Approx(0.5));
  CHECK_FALSE(r.sampled);

  r = validate_assumption_function(1.0, Scaling::polynomial(1.0, 2.0), 1.0, 100.0);
  CHECK_FALSE(r.pass);
  REQUIRE(r.violated.size() == 1);
  CHECK(r.violated[0] == "sup_b_dot_over_b_lt_lambda");

  r = validate_assumption_function(1.0, Scaling::polynomial(1.0, 1.0), 2.0, 100.0);
  CHECK(r.pass);
  CHECK(r.quantities.at("sup_b_dot_over_b") == doctest::Approx(0.5));

  r = validate_assumption_function(1.0, Scaling::special_function_case(4.0, 1.0, 1.0, 0.0), 0.0, 100.0);
  CHECK(r.pass);
  CHECK(r.quantities.at("sup_b_dot_over_b") == doctest::Approx(2.0 / 3.0));

  // strictness: rho == lambda fails
  CHECK_FALSE(validate_assumption_function(0.5, Scaling::exponential(1.0, 0.5), 0.0, 10.0).pass);
}

TEST_CASE("function-case truth table over alpha") {
  for (double alpha : {2.5, 3.0, 3.01, 4.0, 10.0}) {
    CAPTURE(alpha);
    const auto b = Scaling::special_function_case(alpha, 1.0, 1.0, 0.0);
    const auto r = validate_assumption_function(1.0, b, 0.0, 100.0);
    CHECK(r.pass == (alpha > 3.0));
    CHECK(r.pass == r.violated.empty());
  }
}

TEST_CASE("sampled scalings are flagged") {
  const auto b = Scaling::custom("t+1", [](double t) { return t + 1.0; }, [](double) { return 1.0; });
  const auto r = validate_assumption_function(1.5, b, 0.0, 100.0);
  CHECK(r.sampled);
  CHECK(r.pass);
  CHECK(r.quantities.at("sup_b_dot_over_b") == doctest::Approx(1.0));
}

TEST_CASE("operator-case assumption examples") {
  const auto mu = Scaling::special_operator_case(4.0, 1.0, 0.0);
  auto r = validate_assumption_operator(1.5, mu, mu, 0.0, 100.0);
  CHECK(r.pass);
  CHECK(r.quantities.at("L") == doctest::Approx(1.0));
  CHECK(r.quantities.at("sup_mu_dot_over_gamma") == doctest::Approx(0.5));
  CHECK(r.quantities.at("two_lambda_minus_3L_plus_inf") == doctest::Approx(0.5));
  CHECK(r.quantities.at("lambda_window_lower") == doctest::Approx(9.0 / 7.0));
  CHECK(r.quantities.at("lambda_window_upper") == doctest::Approx(3.0));

  const auto mu2 = Scaling::special_operator_case(2.0, 1.0, 0.0);
  r = validate_assumption_operator(1.0, mu2, mu2, 0.0, 100.0);
  CHECK_FALSE(r.pass);
  CHECK(r.quantities.at("lambda_window_nonempty") == 0.0);

  const auto one = Scaling::constant(1.0);
  r = validate_assumption_operator(2.0, one, one, 0.0, 100.0);
  CHECK(r.pass);
  CHECK(r.quantities.at("L") == 1.0);
  CHECK(r.quantities.at("sup_mu_dot_over_gamma") == 0.0);
  CHECK(r.quantities.at("two_lambda_minus_3L_plus_inf") == doctest::Approx(1.0));
}

TEST_CASE("operator-case truth table over alpha") {
  for (double alpha : {1.5, 2.0, 2.01, 3.0, 4.0, 8.0}) {
    CAPTURE(alpha);
    const auto mu = Scaling::special_operator_case(alpha, 1.0, 0.0);
    const auto r = validate_assumption_operator(2.0 * (alpha - 1.0) / alpha, mu, mu, 0.0, 100.0);
    CHECK(r.pass == (alpha > 2.0));
    CHECK(r.pass == r.violated.empty());
  }
}

TEST_CASE("operator-case limits") {
  SUBCASE("gamma growing faster than mu has no finite limit") {
    const auto r = validate_assumption_operator(2.0, Scaling::exponential(1.0, 0.1),
                                                Scaling::exponential(1.0, 0.2), 0.0, 100.0);
    CHECK_FALSE(r.pass);
    CHECK(r.outcome == AssumptionOutcome::fail);
  }
  SUBCASE("oscillating ratio is indeterminate") {
    const auto mu = Scaling::constant(1.0);
    const auto gamma = Scaling::custom(
        "osc", [](double t) { return 1.5 + 0.5 * std::sin(t); },
        [](double t) { return 0.5 * std::cos(t); });
    const auto r = validate_assumption_operator(3.0, mu, gamma, 0.0, 100.0);
    CHECK(r.outcome == AssumptionOutcome::indeterminate);
    CHECK_FALSE(r.pass);
  }
  SUBCASE("a stabilized sampled ratio yields a limit") {
    const auto mu = Scaling::custom("e^t", [](double t) { return std::exp(t); },
                                    [](double t) { return std::exp(t); });
    const auto r = validate_assumption_operator(3.0, mu, Scaling::exponential(2.0, 1.0), 0.0, 50.0);
    CHECK(r.outcome == AssumptionOutcome::pass);
    CHECK(r.quantities.at("L") == doctest::Approx(2.0));
  }
}
