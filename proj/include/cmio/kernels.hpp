#pragma once

// Data-parallel inner loops. Each kernel has a plain serial version, kept as
// the reference the tests compare against, and an OpenMP version used by the
// library. Parallel versions split work over independent output elements, so
// their results do not depend on the thread count.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace cmio::kernels {

/// Column means and centered cross-product matrix (X - 1 mu^T)^T (X - 1 mu^T).
struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd scatter;
};

Moments moments_serial(const Eigen::MatrixXd& x);
Moments moments_parallel(const Eigen::MatrixXd& x);

/// scatter -> correlation. Columns with zero variance get NaN rows/cols.
Eigen::MatrixXd correlation_from_scatter(const Eigen::MatrixXd& scatter);

/// One partial-correlation query against a correlation matrix.
struct PartialQuery {
  std::size_t a = 0;
  std::size_t b = 0;
  std::vector<std::size_t> cond;
};

/// rho(a, b | cond) for every query, computed from the correlation matrix
/// by Cholesky-residualising a and b on cond. NaN marks a degenerate query
/// (singular cond block or zero residual variance).
std::vector<double> partial_correlations_serial(const Eigen::MatrixXd& corr,
                                                const std::vector<PartialQuery>& queries);
std::vector<double> partial_correlations_parallel(const Eigen::MatrixXd& corr,
                                                  const std::vector<PartialQuery>& queries);

double partial_correlation_from_corr(const Eigen::MatrixXd& corr, const PartialQuery& q);

}  // namespace cmio::kernels
