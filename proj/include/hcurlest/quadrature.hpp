#pragma once

#include <array>
#include <vector>

namespace hcurlest {

/// Points in barycentric coordinates with weights summing to the measure of
/// the reference simplex (1/6 for the unit tet, 1/2 for the unit triangle,
/// 1 for the unit interval).
template <int NumBary>
struct SimplexRule {
  std::vector<std::array<double, NumBary>> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

using TetRule = SimplexRule<4>;
using TriangleRule = SimplexRule<3>;
using LineRule = SimplexRule<2>;

inline constexpr double kRefTetVolume = 1.0 / 6.0;
inline constexpr double kRefTriangleArea = 0.5;

/// Collapsed (conical) Gauss-Jacobi product rules, exact for polynomials of
/// total degree <= `degree`. All weights are positive and all points lie
/// strictly inside the simplex.
TetRule tet_rule(int degree);
TriangleRule triangle_rule(int degree);
LineRule line_rule(int degree);

/// Gauss-Jacobi nodes/weights on [0, 1] for the weight (1 - t)^alpha.
void gauss_jacobi_01(int n, int alpha, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace hcurlest
