#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmio/dataset.hpp"

namespace cmio {

/// Raised when a design matrix is rank deficient; lists the columns that
/// the pivoted QR could not separate from the others.
class RankDeficientError : public std::runtime_error {
 public:
  RankDeficientError(const std::string& what, std::vector<std::string> columns)
      : std::runtime_error(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

struct RegressionFit {
  std::vector<std::string> regressors;
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  /// RSS / (n - |regressors| - 1).
  double residual_variance = 0.0;
  double rss = 0.0;
  std::size_t n = 0;

  double coefficient(const std::string& name) const;
};

/// Relative tolerance for rank decisions in every QR the library performs.
inline constexpr double kRankTolerance = 1e-10;

/// Least squares of `y` on an intercept plus the columns of `x`, via
/// column-pivoted Householder QR. `names` label the columns for error
/// messages (may be empty). Needs n > cols + 1.
RegressionFit ols_matrix(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::MatrixXd>& x,
                         const std::vector<std::string>& names = {});

RegressionFit ols(const Dataset& d, const std::string& response, const std::vector<std::string>& regressors);

/// Coefficient of x in the regression of y on {x} u z.
double adjusted_effect(const Dataset& d, const std::string& x, const std::string& y,
                       const std::vector<std::string>& z);
double adjusted_effect(const Dataset& d, std::size_t x, std::size_t y, std::span<const std::size_t> z);

/// Correlation of the residuals of a and b after regressing each on cond
/// (with intercept). Throws std::runtime_error if either residual has no
/// variance.
double partial_correlation(const Dataset& d, const std::string& a, const std::string& b,
                           const std::vector<std::string>& cond);

struct CiResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool independent = true;
  std::size_t cond_size = 0;
  /// n - |cond| - 3 < 1: no test was possible and the result is "dependent".
  bool underpowered = false;
};

/// Fisher z decision for a partial correlation r from n samples.
CiResult fisher_z_from_r(double r, std::size_t n, std::size_t cond_size, double alpha);

CiResult fisher_z_test(const Dataset& d, const std::string& a, const std::string& b,
                       const std::vector<std::string>& cond, double alpha);

/// Conditional-independence test over dataset column indices. Fisher z is
/// the only shipped implementation; other tests plug in here.
class CiTest {
 public:
  virtual ~CiTest() = default;
  virtual CiResult test(std::size_t a, std::size_t b, std::span<const std::size_t> cond, double alpha) const = 0;
  /// Batched form; the default loops over test().
  virtual std::vector<CiResult> test_many(std::size_t a, std::size_t b,
                                          const std::vector<std::vector<std::size_t>>& conds, double alpha) const;
};

/// Fisher z on a cached correlation matrix of the whole dataset.
class FisherZTest final : public CiTest {
 public:
  explicit FisherZTest(const Dataset& d);
  explicit FisherZTest(const Eigen::MatrixXd& values);

  CiResult test(std::size_t a, std::size_t b, std::span<const std::size_t> cond, double alpha) const override;
  std::vector<CiResult> test_many(std::size_t a, std::size_t b, const std::vector<std::vector<std::size_t>>& conds,
                                  double alpha) const override;

  const Eigen::MatrixXd& correlation() const { return corr_; }
  std::size_t samples() const { return n_; }

 private:
  Eigen::MatrixXd corr_;
  std::size_t n_ = 0;
};

/// Standard normal upper tail, 1 - Phi(z).
double normal_upper_tail(double z);

}  // namespace cmio
