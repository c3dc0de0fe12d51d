#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace hcurlest {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Thrown when an input violates a documented precondition (bad mesh, bad
/// coefficients, malformed configuration, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical procedure cannot deliver its postcondition
/// (solver breakdown, iteration cap, singular factorization).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector field evaluated inside the subdomain `label`. Coefficient jumps
/// make many benchmark fields one-sided on interfaces, so the label of the
/// element hosting the evaluation point is always passed along.
using VectorField = std::function<Vec3(const Vec3& x, int label)>;
using ScalarField = std::function<double(const Vec3& x, int label)>;

inline double sqr(double v) { return v * v; }

}  // namespace hcurlest
