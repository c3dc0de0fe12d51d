#include "fixtures.hpp"

#include "hcurlest/amr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace hcurlest;

namespace {

// Smallest subset reaching theta of the total squared sum; among those of
// that size, the one with the largest sum. Exhaustive over all subsets.
std::set<int> brute_force_dorfler(const std::vector<double>& eta, double theta) {
  const int n = static_cast<int>(eta.size());
  double total = 0.0;
  for (double v : eta) total += v * v;
  int best_size = n + 1;
  double best_sum = -1.0;
  unsigned best = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double s = 0.0;
    int size = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        s += eta[i] * eta[i];
        ++size;
      }
    }
    if (s < theta * total) continue;
    if (size < best_size || (size == best_size && s > best_sum)) {
      best_size = size;
      best_sum = s;
      best = mask;
    }
  }
  std::set<int> out;
  for (int i = 0; i < n; ++i) {
    if (best & (1u << i)) out.insert(i);
  }
  return out;
}

std::set<int> as_set(const std::vector<int>& v) { return {v.begin(), v.end()}; }

AmrConfig small_config(EstimatorKind kind, std::size_t max_dofs) {
  AmrConfig c;
  c.estimator = kind;
  c.max_dofs = max_dofs;
  c.target_rel_error = 0.0;
  return c;
}

}  // namespace

TEST(Dorfler, HandExample) {
  const std::vector<double> eta{3, 2, 2, 1};
  EXPECT_EQ(as_set(dorfler_mark(eta, 0.6)), (std::set<int>{0, 1}));
  EXPECT_EQ(dorfler_mark(eta, 1.0).size(), 4u);
  EXPECT_EQ(as_set(dorfler_mark(eta, 1e-6)), std::set<int>{0});
  EXPECT_TRUE(dorfler_mark(std::vector<double>{0, 0, 0}, 0.5).empty());
}

TEST(Dorfler, MatchesExhaustiveSearch) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> eta(10);
    for (double& v : eta) v = u(rng);
    const double theta = 0.05 + 0.9 * u(rng);
    EXPECT_EQ(as_set(dorfler_mark(eta, theta)), brute_force_dorfler(eta, theta)) << trial;
  }
}

TEST(Dorfler, RejectsBadInput) {
  const std::vector<double> eta{1, 2};
  EXPECT_THROW(dorfler_mark(eta, 0.0), InvalidInput);
  EXPECT_THROW(dorfler_mark(eta, 1.5), InvalidInput);
  EXPECT_THROW(dorfler_mark(std::vector<double>{1, -1}, 0.5), InvalidInput);
}

TEST(AmrConfig, Validation) {
  AmrConfig c;
  c.theta = 0.0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = AmrConfig{};
  c.max_dofs = 0;
  c.max_iterations = 0;
  c.target_rel_error = 0.0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = AmrConfig{};
  c.error_degree = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  EXPECT_NO_THROW(AmrConfig{}.validate());
}

TEST(EstimatorKind, NamesRoundTrip) {
  for (EstimatorKind k : {EstimatorKind::New, EstimatorKind::NewLocal, EstimatorKind::Res}) {
    EXPECT_EQ(estimator_from_string(to_string(k)), k);
  }
  EXPECT_EQ(to_string(EstimatorKind::NewLocal), "NEW_LOCAL");
  EXPECT_THROW(estimator_from_string("ZZ"), InvalidInput);
}

TEST(RunAmr, RecordsAreConsistent) {
  const ProblemSpec p = example2(SourceVariant::DivergenceFree);
  AmrConfig c = small_config(EstimatorKind::New, 3000);
  c.track_both_new_estimators = true;
  int callbacks = 0;
  c.on_iteration = [&](const IterationState& s) {
    ++callbacks;
    EXPECT_EQ(s.estimate.indicators.size(), s.mesh.num_tets());
  };
  const AmrResult r = run_amr(p, p.initial_mesh(), c);
  ASSERT_TRUE(r.failure.empty()) << r.failure;
  ASSERT_GE(r.records.size(), 3u);
  EXPECT_EQ(callbacks, static_cast<int>(r.records.size()));
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const ConvergenceRecord& rec = r.records[i];
    EXPECT_EQ(rec.iter, static_cast<int>(i));
    if (i > 0) EXPECT_GT(rec.dof, r.records[i - 1].dof);
    EXPECT_NEAR(rec.eff_index * rec.error, rec.eta, 1e-12 * rec.eta);
    EXPECT_NEAR(rec.error, std::hypot(rec.primal_error, rec.auxiliary_error), 1e-12 * rec.error);
    EXPECT_GE(rec.eta_tilde, rec.eta_new * (1 - 1e-12));
    EXPECT_GT(rec.eff_index, 0.9);
    EXPECT_LT(rec.eff_index, 1.1);
  }
  EXPECT_GE(r.records.back().dof, 3000u);
  EXPECT_EQ(r.records.back().marked, 0u);
  EXPECT_EQ(r.u.size(), static_cast<Eigen::Index>(r.mesh->num_edges()));
}

TEST(RunAmr, StopsAtIterationCap) {
  const ProblemSpec p = example1(SourceVariant::NotHDiv);
  AmrConfig c = small_config(EstimatorKind::Res, 0);
  c.max_iterations = 2;
  const AmrResult r = run_amr(p, p.initial_mesh(), c);
  EXPECT_EQ(r.records.size(), 2u);
  EXPECT_TRUE(std::isnan(r.records[0].eta_new));
}

TEST(RunAmr, SolverFailureKeepsCompletedIterations) {
  const ProblemSpec p = example2(SourceVariant::NotHDiv);
  AmrConfig c = small_config(EstimatorKind::New, 100000);
  c.primal_solver.max_iterations = 1;
  const AmrResult r = run_amr(p, p.initial_mesh(), c);
  EXPECT_FALSE(r.failure.empty());
  EXPECT_TRUE(r.records.empty());
}

TEST(RunAmr, UniformRefinementRateOnSmoothProblem) {
  const ProblemSpec p = smooth_cube_problem();
  AmrConfig c = small_config(EstimatorKind::New, 0);
  c.theta = 1.0;
  c.max_iterations = 10;
  const AmrResult r = run_amr(p, p.initial_mesh({2, 2, 2}), c);
  ASSERT_EQ(r.records.size(), 10u);
  const auto& a = r.records[r.records.size() - 7];
  const auto& b = r.records.back();
  const double slope = std::log(b.error / a.error) / std::log(static_cast<double>(b.dof) / a.dof);
  EXPECT_LT(slope, -0.28);
}
