#pragma once

#include "hcurlest/fem.hpp"

#include <string>
#include <vector>

namespace hcurlest {

/// Per-element indicators of one estimator. `components[c][K]` holds the
/// squared contribution of component c on element K; the components of one
/// element sum to indicators[K]^2.
struct EstimateReport {
  std::string name;
  std::vector<double> indicators;
  std::vector<std::string> component_names;
  std::vector<std::vector<double>> components;
  double global = 0.0;
  std::string solver_mode;

  double global_sq() const { return global * global; }
};

/// eta_K^2 = ||mu^{-1/2}(mu sigma - curl u)||_K^2 + ||beta^{-1/2}(curl sigma + beta u - f)||_K^2.
/// `sigma` may be conforming or broken (curls are taken elementwise).
EstimateReport eta_two_term(const DiscreteField& u, const DiscreteField& sigma, const ProblemSpec& problem,
                            int volume_degree, std::string name);

inline EstimateReport eta_new(const SolutionField& u, const SolutionField& sigma, const ProblemSpec& problem,
                              int volume_degree = 4) {
  return eta_two_term(u, sigma, problem, volume_degree, "NEW");
}

EstimateReport eta_tilde(const SolutionField& u, const DiscreteField& sigma_tilde, const ProblemSpec& problem,
                         int volume_degree = 4);

/// Weighted residual indicator with face weights mu_F = max(mu_K1, mu_K2),
/// beta_F = min(beta_K1, beta_K2). Interior faces only carry jump terms, each
/// shared half/half between the two neighbours (weight h_F / 2 per side).
EstimateReport eta_res(const SolutionField& u, const ProblemSpec& problem, const QuadratureDegrees& quad = {});

struct DualityGap {
  double J = 0.0;
  double J_star = 0.0;
  double gap = 0.0;  // 2 (J - J*)
};

/// J(v) = A(v, v)/2 - (f, v) - <g_N, v> and
/// J*(tau) = -(mu tau, tau)/2 - ||beta^{-1/2}(f - curl tau)||^2/2 - <g_D, tau>.
/// Boundary data enter through their edge interpolants, the same traces the
/// discrete problems impose.
DualityGap duality_gap(const SolutionField& u, const SolutionField& sigma, const ProblemSpec& problem,
                       const QuadratureDegrees& quad = {});

}  // namespace hcurlest
