#include "hcurlest/amr.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace hcurlest {

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::New:
      return "NEW";
    case EstimatorKind::NewLocal:
      return "NEW_LOCAL";
    case EstimatorKind::Res:
      return "RES";
  }
  return "?";
}

EstimatorKind estimator_from_string(const std::string& s) {
  if (s == "NEW") return EstimatorKind::New;
  if (s == "NEW_LOCAL") return EstimatorKind::NewLocal;
  if (s == "RES") return EstimatorKind::Res;
  throw InvalidInput("unknown estimator '" + s + "' (expected NEW, NEW_LOCAL or RES)");
}

void AmrConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) throw InvalidInput("Doerfler theta must lie in (0, 1]");
  if (max_dofs == 0 && max_iterations <= 0 && !(target_rel_error > 0.0)) {
    throw InvalidInput("AMR needs at least one stop criterion (max_dofs, max_iterations, target_rel_error)");
  }
  if (max_iterations < 0) throw InvalidInput("max_iterations must be non-negative");
  if (target_rel_error < 0.0) throw InvalidInput("target_rel_error must be non-negative");
  if (error_degree < 1 || error_degree > 40) throw InvalidInput("error quadrature degree must lie in [1, 40]");
  primal_solver.validate();
  auxiliary_solver.validate();
  quadrature.validate();
}

std::vector<int> dorfler_mark(std::span<const double> indicators, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw InvalidInput("Doerfler theta must lie in (0, 1]");
  double total = 0.0;
  for (double v : indicators) {
    if (!(v >= 0.0)) throw InvalidInput("indicators must be non-negative");
    total += v * v;
  }
  std::vector<int> order(indicators.size());
  std::iota(order.begin(), order.end(), 0);
  if (total == 0.0) return {};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return indicators[a] > indicators[b]; });
  std::vector<int> marked;
  double acc = 0.0;
  for (int t : order) {
    if (acc >= theta * total || indicators[t] == 0.0) break;
    marked.push_back(t);
    acc += indicators[t] * indicators[t];
  }
  return marked;
}

double exact_primal_norm(const TetMesh& mesh, const ProblemSpec& problem, int degree) {
  auto inv_mu = [&](int l) { return 1.0 / problem.mu(l); };
  return energy_error(nullptr, mesh, problem.exact_u, problem.exact_curl_u, inv_mu, problem.beta, degree).total;
}

double exact_auxiliary_norm(const TetMesh& mesh, const ProblemSpec& problem, int degree) {
  auto inv_beta = [&](int l) { return 1.0 / problem.beta(l); };
  VectorField curl_sigma = [&](const Vec3& x, int l) { return problem.exact_curl_sigma(x, l); };
  return energy_error(nullptr, mesh, problem.exact_sigma, curl_sigma, inv_beta, problem.mu, degree).total;
}

AmrResult run_amr(const ProblemSpec& problem, const TetMesh& initial, const AmrConfig& config) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  AmrResult result;
  auto mesh = std::make_unique<TetMesh>(initial);

  for (int iter = 0;; ++iter) {
    ConvergenceRecord rec;
    rec.iter = iter;
    rec.dof = mesh->num_edges();
    try {
      const LinearSystem primal = assemble_primal(*mesh, problem, config.quadrature);
      const SolutionField u(*mesh, solve(primal, config.primal_solver).coefficients);
      rec.primal_error = primal_energy_error(u, problem, config.error_degree).total;
      const double u_norm = exact_primal_norm(*mesh, problem, config.error_degree);

      EstimateReport est;
      if (config.estimator == EstimatorKind::Res) {
        est = eta_res(u, problem, config.quadrature);
        rec.error = rec.primal_error;
        rec.rel_error = rec.error / u_norm;
      } else {
        const LinearSystem aux = assemble_auxiliary(*mesh, problem, config.quadrature);
        const SolutionField sigma(*mesh, solve(aux, config.auxiliary_solver).coefficients);
        rec.auxiliary_error = auxiliary_energy_error(sigma, problem, config.error_degree).total;
        rec.error = std::hypot(rec.primal_error, rec.auxiliary_error);
        rec.rel_error = rec.error / std::hypot(u_norm, exact_auxiliary_norm(*mesh, problem, config.error_degree));
        EstimateReport eta = eta_new(u, sigma, problem, config.quadrature.volume);
        eta.solver_mode = to_string(config.auxiliary_solver.mode);
        rec.eta_new = eta.global;
        const bool local = config.estimator == EstimatorKind::NewLocal;
        if (local || config.track_both_new_estimators) {
          const LocalRecovery rl = recover_local(u, problem, config.quadrature.volume);
          EstimateReport tilde = eta_tilde(u, rl.sigma_tilde, problem, config.quadrature.volume);
          rec.eta_tilde = tilde.global;
          est = local ? std::move(tilde) : std::move(eta);
        } else {
          est = std::move(eta);
        }
      }
      rec.eta = est.global;
      rec.eff_index = rec.eta / rec.error;

      const bool done = (config.target_rel_error > 0.0 && rec.rel_error <= config.target_rel_error) ||
                        (config.max_dofs > 0 && rec.dof >= config.max_dofs) ||
                        (config.max_iterations > 0 && iter + 1 >= config.max_iterations);
      std::vector<int> marked;
      if (!done) marked = dorfler_mark(est.indicators, config.theta);
      rec.marked = marked.size();
      rec.seconds = std::chrono::duration<double>(Clock::now() - start).count();
      result.records.push_back(rec);
      if (config.on_iteration) config.on_iteration({*mesh, u, est, rec});

      result.u = u.coefficients();
      result.estimate = std::move(est);
      if (done || marked.empty()) break;
      auto next = std::make_unique<TetMesh>(bisect(*mesh, marked));
      mesh = std::move(next);
    } catch (const NumericalFailure& e) {
      result.failure = std::string("iteration ") + std::to_string(iter) + ": " + e.what();
      break;
    }
  }
  result.mesh = std::move(mesh);
  return result;
}

}  // namespace hcurlest
