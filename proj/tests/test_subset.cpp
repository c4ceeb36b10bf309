#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "cmio/sem.hpp"
#include "cmio/stats.hpp"
#include "cmio/subset.hpp"
#include "oracles.hpp"

using cmio::SolverConfig;
using cmio::SubsetProblem;

namespace {

SubsetProblem random_problem(cmio::Rng& rng, Eigen::Index n, Eigen::Index p, std::size_t k, double noise = 1.0) {
  SubsetProblem prob;
  prob.k = k;
  prob.design.resize(n, p + 1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= p; ++j) prob.design(i, j) = rng.normal();
  // Correlated neighbours make the landscape less trivial.
  for (Eigen::Index j = 2; j <= p; ++j) prob.design.col(j) += 0.5 * prob.design.col(j - 1);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  beta(0) = 1.0;
  for (Eigen::Index j = 1; j <= p; j += 2) beta(j) = rng.normal();
  prob.response = prob.design * beta;
  for (Eigen::Index i = 0; i < n; ++i) prob.response(i) += noise * rng.normal() + 3.0;
  return prob;
}

bool non_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + 1e-9 * std::max(1.0, std::abs(v[i - 1]))) return false;
  return true;
}

}  // namespace

TEST_CASE("k = 0 fits the treatment alone and k = p fits everything") {
  cmio::Rng rng(1);
  auto prob = random_problem(rng, 40, 5, 0);
  const auto s0 = cmio::solve_k_sparse(prob, {});
  CHECK(s0.support.empty());
  CHECK(s0.beta.isZero());
  const auto fit0 = cmio::ols_matrix(prob.response, prob.design.leftCols(1));
  CHECK(s0.objective == doctest::Approx(0.5 * fit0.rss).epsilon(1e-9));
  CHECK(s0.alpha == doctest::Approx(fit0.coefficients(0)).epsilon(1e-9));

  prob.k = 5;
  const auto s5 = cmio::solve_k_sparse(prob, {});
  CHECK(s5.support.size() == 5);
  const auto fit5 = cmio::ols_matrix(prob.response, prob.design);
  CHECK(s5.objective == doctest::Approx(0.5 * fit5.rss).epsilon(1e-9));
  CHECK(s5.intercept == doctest::Approx(fit5.intercept).epsilon(1e-9));
}

TEST_CASE("exhaustive search matches brute force over the normal equations") {
  cmio::Rng rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    auto prob = random_problem(rng, 50, 7, 1 + rep % 5);
    const auto ex = cmio::solve_exhaustive(prob);
    const double brute = 0.5 * oracle::brute_force_best_rss(prob.design, prob.response, prob.k);
    CHECK(ex.objective == doctest::Approx(brute).epsilon(1e-8));
    CHECK(ex.support.size() == prob.k);
  }
}

TEST_CASE("iterative solver reaches the exhaustive optimum") {
  cmio::Rng rng(3);
  int matches = 0;
  const int reps = 30;
  for (int rep = 0; rep < reps; ++rep) {
    auto prob = random_problem(rng, 60, 10, 1 + rep % 6);
    const auto ex = cmio::solve_exhaustive(prob);
    const auto it = cmio::solve_k_sparse(prob, {});
    CHECK(it.objective >= ex.objective - 1e-6 * std::max(1.0, ex.objective));
    matches += std::abs(it.objective - ex.objective) <= 1e-6 * std::max(1.0, ex.objective);
  }
  CHECK(matches == reps);
}

TEST_CASE("first simulation design: k = 20 recovers the outcome parents") {
  const auto d = cmio::make_case(1, 1000, 11).second;
  const auto prob = SubsetProblem::from_dataset(d, 20);
  const auto sol = cmio::solve_k_sparse(prob, {});
  std::set<std::string> got(sol.support_names.begin(), sol.support_names.end());
  std::set<std::string> want;
  for (int i = 1; i <= 20; ++i) want.insert("Z" + std::to_string(i));
  CHECK(got == want);
  CHECK(std::abs(sol.alpha - 0.5) < 0.2);
}

TEST_CASE("hidden chain: the best single covariate is the proxy") {
  const auto d = cmio::sample(cmio::chain_model(true), 5000, 4);
  const auto sol = cmio::solve_k_sparse(SubsetProblem::from_dataset(d, 1), {});
  REQUIRE(sol.support_names.size() == 1);
  CHECK(sol.support_names[0] == "Z3");
}

TEST_CASE("argument checks") {
  cmio::Rng rng(5);
  auto big = random_problem(rng, 30, 16, 2);
  CHECK_THROWS_AS(cmio::solve_exhaustive(big), std::invalid_argument);
  auto prob = random_problem(rng, 30, 4, 5);
  CHECK_THROWS_AS(cmio::solve_k_sparse(prob, {}), std::invalid_argument);
  CHECK_THROWS_AS(cmio::solve_exhaustive(prob), std::invalid_argument);
  prob.k = 2;
  SolverConfig cfg;
  cfg.step_factor = 0.9;
  CHECK_THROWS_AS(cmio::solve_k_sparse(prob, cfg), std::invalid_argument);
  auto bad = prob;
  bad.design(3, 2) = std::nan("");
  CHECK_THROWS_AS(cmio::solve_k_sparse(bad, {}), std::invalid_argument);
  bad = prob;
  bad.response(0) = INFINITY;
  CHECK_THROWS_AS(cmio::solve_k_sparse(bad, {}), std::invalid_argument);
  auto boxed = prob;
  boxed.box_bound = 1.0;
  CHECK_THROWS_AS(cmio::solve_exhaustive(boxed), std::invalid_argument);
  boxed.box_bound = -1.0;
  CHECK_THROWS_AS(cmio::solve_k_sparse(boxed, {}), std::invalid_argument);
}

TEST_CASE("objective trace is non-increasing and satisfies sufficient decrease") {
  cmio::Rng rng(6);
  for (int rep = 0; rep < 10; ++rep) {
    const auto prob = random_problem(rng, 80, 12, 3);
    SolverConfig cfg;
    cfg.record_trace = true;
    cfg.verify_descent = true;
    cfg.step_factor = 2.0;
    cmio::SubsetSolution sol;
    CHECK_NOTHROW(sol = cmio::solve_k_sparse(prob, cfg));
    CHECK(sol.trace.size() >= 1);
    CHECK(non_increasing(cmio::objective_trace(sol)));
    CHECK(sol.step_constant == doctest::Approx(2.0 * sol.lipschitz));
    for (const auto& t : sol.trace)
      if (t.kind == cmio::StepKind::gradient) CHECK(t.step_norm_sq >= 0.0);
  }
}

TEST_CASE("step constants slightly and far above l reach the same optimum") {
  cmio::Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const auto prob = random_problem(rng, 70, 10, 4);
    SolverConfig a, b;
    a.step_factor = 2.0;
    b.step_factor = 1.05;
    const auto sa = cmio::solve_k_sparse(prob, a);
    const auto sb = cmio::solve_k_sparse(prob, b);
    CHECK(sa.objective == doctest::Approx(sb.objective).epsilon(1e-8));
    CHECK(sa.support == sb.support);
  }
}

TEST_CASE("noiseless sparse signal is recovered exactly") {
  cmio::Rng rng(8);
  SubsetProblem prob;
  prob.k = 3;
  prob.design.resize(100, 21);
  for (Eigen::Index i = 0; i < 100; ++i)
    for (Eigen::Index j = 0; j < 21; ++j) prob.design(i, j) = rng.normal();
  prob.response = 1.5 * prob.design.col(0) + 2.0 * prob.design.col(4) - 1.0 * prob.design.col(9) +
                  0.7 * prob.design.col(17);
  const auto sol = cmio::solve_k_sparse(prob, {});
  CHECK(sol.support == std::vector<std::size_t>{3, 8, 16});
  CHECK(sol.objective < 1e-10 * prob.response.squaredNorm());
  CHECK(sol.alpha == doctest::Approx(1.5));
  CHECK(sol.beta(3) == doctest::Approx(2.0));
  CHECK(sol.beta(8) == doctest::Approx(-1.0));
}

TEST_CASE("solution invariants") {
  cmio::Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t k = rep % 7;
    const auto prob = random_problem(rng, 50, 9, k);
    const auto sol = cmio::solve_k_sparse(prob, {});
    CHECK(sol.support.size() == k);
    CHECK(std::is_sorted(sol.support.begin(), sol.support.end()));
    std::size_t nonzero = 0;
    for (Eigen::Index j = 0; j < sol.beta.size(); ++j) nonzero += sol.beta(j) != 0.0;
    CHECK(nonzero <= k);
    // Reported objective equals half the RSS of the reported coefficients.
    const Eigen::VectorXd r = prob.response - Eigen::VectorXd::Constant(50, sol.intercept) -
                              sol.alpha * prob.design.col(0) - prob.design.rightCols(9) * sol.beta;
    CHECK(0.5 * r.squaredNorm() == doctest::Approx(sol.objective).epsilon(1e-8));
  }
}

TEST_CASE("results are deterministic in the seed") {
  cmio::Rng rng(10);
  const auto prob = random_problem(rng, 60, 30, 5);
  SolverConfig cfg;
  cfg.record_trace = true;
  const auto a = cmio::solve_k_sparse(prob, cfg);
  const auto b = cmio::solve_k_sparse(prob, cfg);
  CHECK(a.support == b.support);
  CHECK(a.objective == b.objective);
  CHECK(a.beta == b.beta);
  std::ostringstream ta, tb;
  cmio::write_trace_csv(ta, a);
  cmio::write_trace_csv(tb, b);
  CHECK(ta.str() == tb.str());
  CHECK(ta.str().rfind("iteration,objective\n", 0) == 0);
}

TEST_CASE("box bound caps standardized coefficients") {
  cmio::Rng rng(11);
  auto prob = random_problem(rng, 80, 8, 3);
  const auto free = cmio::solve_k_sparse(prob, {});
  prob.box_bound = 0.05;
  const auto boxed = cmio::solve_k_sparse(prob, {});
  CHECK(boxed.objective >= free.objective - 1e-9);
  CHECK(boxed.support.size() <= 3);
  for (Eigen::Index j = 0; j < 8; ++j) {
    const Eigen::VectorXd c = prob.design.col(j + 1).array() - prob.design.col(j + 1).mean();
    CHECK(std::abs(boxed.beta(j)) * c.norm() <= 0.05 + 1e-12);
  }
}
