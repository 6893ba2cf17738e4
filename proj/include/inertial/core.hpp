#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace inertial {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = Vec<double>;
using Matrix = Mat<double>;

// Position/auxiliary pair of a first-order reformulation.  The integrator
// works on the stacked vector [p; u].
template <typename Scalar>
struct State {
  Scalar time{};
  Vec<Scalar> p;
  Vec<Scalar> u;
};

template <typename Scalar>
Vec<Scalar> stack(const Vec<Scalar>& p, const Vec<Scalar>& u) {
  Vec<Scalar> z(p.size() + u.size());
  z << p, u;
  return z;
}

template <typename Scalar>
State<Scalar> unstack(Scalar time, const Vec<Scalar>& z) {
  const Eigen::Index d = z.size() / 2;
  return State<Scalar>{time, z.head(d), z.tail(d)};
}

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace inertial
