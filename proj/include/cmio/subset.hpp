#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmio/dataset.hpp"

namespace cmio {

/// min over (intercept, alpha, beta) of 1/2 ||y - intercept - alpha x - Z beta||^2
/// subject to ||beta||_0 <= k (and |beta_j| <= box_bound when set).
///
/// Column 0 of `design` is the treatment: always in the model, never
/// thresholded. Columns 1..p are the covariates the budget k applies to.
/// The intercept is handled by centering and is never penalised.
struct SubsetProblem {
  Eigen::MatrixXd design;
  Eigen::VectorXd response;
  std::size_t k = 0;
  /// Bound on standardized coefficients (on raw ones if standardize is off).
  std::optional<double> box_bound;
  /// Scale covariates to unit norm before iterating. Coefficients are always
  /// reported on the original scale.
  bool standardize = true;
  std::vector<std::string> covariate_names;

  std::size_t n() const { return static_cast<std::size_t>(design.rows()); }
  std::size_t p() const { return design.cols() > 0 ? static_cast<std::size_t>(design.cols() - 1) : 0; }

  /// Problem for regressing the dataset's outcome on its treatment plus the
  /// given covariate columns (all covariates when `columns` is empty).
  static SubsetProblem from_dataset(const Dataset& d, std::size_t k, const std::vector<std::size_t>& columns = {});
};

struct SolverConfig {
  /// L = step_factor * l, with l the largest eigenvalue of the (scaled)
  /// Gram matrix. Values below 1 are rejected.
  double step_factor = 1.0;
  std::size_t max_iterations = 1000;
  /// Relative objective change that counts as a stalled iteration.
  double tolerance = 1e-10;
  /// Total starts: one from thresholded least squares, any warm supports,
  /// and random supports for the rest.
  std::size_t restarts = 50;
  std::uint64_t seed = 0x5eed;
  /// Consecutive iterations with an unchanged support before polishing.
  std::size_t stable_window = 3;
  /// Best-improvement single-swap local search on the best distinct
  /// local optima.
  bool swap_polish = true;
  /// How many distinct local optima get the swap search.
  std::size_t polish_candidates = 5;
  /// Keep the objective trace of the winning run.
  bool record_trace = false;
  /// Check the sufficient-decrease inequality on every gradient step and
  /// throw std::logic_error when it fails.
  bool verify_descent = false;
  /// Extra starting supports (covariate indices, 0-based).
  std::vector<std::vector<std::size_t>> warm_supports;
};

enum class StepKind { start, gradient, polish, swap };

struct TraceStep {
  std::size_t iteration = 0;
  double objective = 0.0;
  StepKind kind = StepKind::start;
  /// ||theta_m - theta_{m+1}||^2 in the scaled coordinates the solver uses.
  double step_norm_sq = 0.0;
};

struct SubsetSolution {
  /// Sorted covariate indices (0-based into the covariate block).
  std::vector<std::size_t> support;
  std::vector<std::string> support_names;
  Eigen::VectorXd beta;
  double alpha = 0.0;
  double intercept = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Largest Gram eigenvalue l and the step constant L that was used.
  double lipschitz = 0.0;
  double step_constant = 0.0;
  std::vector<TraceStep> trace;
};

/// Discrete first-order method: theta <- H_k(theta - grad g(theta) / L),
/// with least-squares polishing once the support settles, over several
/// starts; returns the best run.
SubsetSolution solve_k_sparse(const SubsetProblem& problem, const SolverConfig& cfg);

/// Global optimum by enumerating every support of size min(k, p). Each
/// support is fitted by QR on the raw data, independently of the iterative
/// solver. Throws std::invalid_argument when p > max_p.
SubsetSolution solve_exhaustive(const SubsetProblem& problem, std::size_t max_p = 15);

std::vector<double> objective_trace(const SubsetSolution& sol);

/// `iteration,objective` rows.
void write_trace_csv(std::ostream& out, const SubsetSolution& sol);

/// Solver state shared across sparsity levels on one data set: the scaled
/// Gram matrix and its top eigenvalue are computed once.
class SubsetSolver {
 public:
  SubsetSolver(const Eigen::MatrixXd& design, const Eigen::VectorXd& response, bool standardize = true,
               std::optional<double> box_bound = std::nullopt, std::vector<std::string> names = {});

  SubsetSolution solve(std::size_t k, const SolverConfig& cfg) const;

  std::size_t p() const { return p_; }
  double lipschitz() const { return lipschitz_; }
  /// 1/2 RSS of the least-squares fit on treatment + `support`.
  double support_objective(const std::vector<std::size_t>& support) const;

 private:
  struct Run;

  Eigen::VectorXd polish(const std::vector<std::size_t>& support) const;
  double objective(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const;
  std::vector<std::size_t> threshold(Eigen::VectorXd& theta, std::size_t k) const;
  Run run_from(std::vector<std::size_t> support, std::size_t k, const SolverConfig& cfg, double step) const;
  void swap_search(Run& run, std::size_t k) const;
  SubsetSolution finish(const Run& run) const;

  std::size_t n_ = 0;
  std::size_t p_ = 0;
  Eigen::MatrixXd gram_;  // (p+1) x (p+1), scaled and centered
  Eigen::VectorXd cross_;  // scaled design^T centered response
  double yy_ = 0.0;
  Eigen::VectorXd mean_;   // design column means
  Eigen::VectorXd scale_;  // design column scales
  double y_mean_ = 0.0;
  double lipschitz_ = 0.0;
  std::optional<double> box_bound_;
  std::vector<std::string> names_;
};

}  // namespace cmio
