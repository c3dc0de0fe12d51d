#include "hcurlest/quadrature.hpp"

#include "hcurlest/core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>

namespace hcurlest {

void gauss_jacobi_01(int n, int alpha, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw InvalidInput("Gauss-Jacobi rule needs at least one point");
  // Golub-Welsch on [-1, 1] for (1 - x)^a (1 + x)^b with b = 0.
  const double a = alpha;
  const double b = 0.0;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    T(k, k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0;
      const double s1 = 2.0 * m + a + b;
      const double beta = 4.0 * m * (m + a) * (m + b) * (m + a + b) / (s1 * s1 * (s1 + 1.0) * (s1 - 1.0));
      T(k, k + 1) = T(k + 1, k) = std::sqrt(beta);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
  // mu0 = int_{-1}^{1} (1 - x)^a dx
  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    const double x = eig.eigenvalues()[k];
    const double v0 = eig.eigenvectors()(0, k);
    nodes[k] = 0.5 * (x + 1.0);
    weights[k] = mu0 * v0 * v0 / std::pow(2.0, a + 1.0);
  }
}

namespace {

int points_for_degree(int degree) { return degree / 2 + 1; }

TetRule make_tet_rule(int degree) {
  const int n = points_for_degree(degree);
  std::vector<double> x1, w1, x2, w2, x3, w3;
  gauss_jacobi_01(n, 2, x1, w1);
  gauss_jacobi_01(n, 1, x2, w2);
  gauss_jacobi_01(n, 0, x3, w3);
  TetRule r;
  r.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double a = x1[i];
        const double b = x2[j] * (1.0 - a);
        const double c = x3[k] * (1.0 - a) * (1.0 - x2[j]);
        r.points.push_back({1.0 - a - b - c, a, b, c});
        r.weights.push_back(w1[i] * w2[j] * w3[k]);
      }
    }
  }
  return r;
}

TriangleRule make_triangle_rule(int degree) {
  const int n = points_for_degree(degree);
  std::vector<double> x1, w1, x2, w2;
  gauss_jacobi_01(n, 1, x1, w1);
  gauss_jacobi_01(n, 0, x2, w2);
  TriangleRule r;
  r.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = x1[i];
      const double b = x2[j] * (1.0 - a);
      r.points.push_back({1.0 - a - b, a, b});
      r.weights.push_back(w1[i] * w2[j]);
    }
  }
  return r;
}

LineRule make_line_rule(int degree) {
  const int n = points_for_degree(degree);
  std::vector<double> x, w;
  gauss_jacobi_01(n, 0, x, w);
  LineRule r;
  r.degree = degree;
  for (int i = 0; i < n; ++i) {
    r.points.push_back({1.0 - x[i], x[i]});
    r.weights.push_back(w[i]);
  }
  return r;
}

template <class Rule, class Make>
const Rule& cached(int degree, Make make) {
  static std::mutex mutex;
  static std::map<int, Rule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, make(degree)).first;
  return it->second;
}

void check_degree(int degree) {
  if (degree < 0 || degree > 40) throw InvalidInput("quadrature degree must lie in [0, 40]");
}

}  // namespace

TetRule tet_rule(int degree) {
  check_degree(degree);
  return cached<TetRule>(degree, make_tet_rule);
}

TriangleRule triangle_rule(int degree) {
  check_degree(degree);
  return cached<TriangleRule>(degree, make_triangle_rule);
}

LineRule line_rule(int degree) {
  check_degree(degree);
  return cached<LineRule>(degree, make_line_rule);
}

}  // namespace hcurlest
