#include "cmio/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cmio/kernels.hpp"

namespace cmio {

double RegressionFit::coefficient(const std::string& name) const {
  for (std::size_t j = 0; j < regressors.size(); ++j)
    if (regressors[j] == name) return coefficients(static_cast<Eigen::Index>(j));
  throw std::invalid_argument("regressor not in fit: " + name);
}

RegressionFit ols_matrix(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::MatrixXd>& x,
                         const std::vector<std::string>& names) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) throw std::invalid_argument("ols: response length does not match design");
  if (n <= p + 1)
    throw std::invalid_argument("ols: need more than " + std::to_string(p + 1) + " rows, got " + std::to_string(n));

  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = x;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < p + 1) {
    std::vector<std::string> bad;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < p + 1; ++k) {
      const Eigen::Index col = perm(k);
      if (col == 0) bad.emplace_back("(intercept)");
      else if (static_cast<std::size_t>(col - 1) < names.size()) bad.push_back(names[static_cast<std::size_t>(col - 1)]);
      else bad.push_back("column " + std::to_string(col - 1));
    }
    std::string msg = "ols: design matrix is rank deficient; collinear columns:";
    for (const auto& b : bad) msg += " " + b;
    throw RankDeficientError(msg, std::move(bad));
  }
  const Eigen::VectorXd beta = qr.solve(y);
  RegressionFit fit;
  fit.regressors = names;
  if (fit.regressors.size() != static_cast<std::size_t>(p)) {
    fit.regressors.clear();
    for (Eigen::Index j = 0; j < p; ++j) fit.regressors.push_back("column " + std::to_string(j));
  }
  fit.intercept = beta(0);
  fit.coefficients = beta.tail(p);
  fit.rss = (y - design * beta).squaredNorm();
  fit.n = static_cast<std::size_t>(n);
  fit.residual_variance = fit.rss / static_cast<double>(n - p - 1);
  return fit;
}

namespace {

Eigen::MatrixXd gather(const Dataset& d, std::span<const std::size_t> cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(d.rows()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = d.column(cols[j]);
  return out;
}

std::vector<std::size_t> indices_of(const Dataset& d, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& nm : names) out.push_back(d.index_of(nm));
  return out;
}

Eigen::VectorXd residualize(const Eigen::VectorXd& v, const Eigen::MatrixXd& cond) {
  Eigen::MatrixXd design(cond.rows(), cond.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(cond.cols()) = cond;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(kRankTolerance);
  return v - design * qr.solve(v);
}

}  // namespace

RegressionFit ols(const Dataset& d, const std::string& response, const std::vector<std::string>& regressors) {
  const std::size_t r = d.index_of(response);
  const auto cols = indices_of(d, regressors);
  for (std::size_t c : cols)
    if (c == r) throw std::invalid_argument("ols: response listed as a regressor");
  return ols_matrix(d.column(r), gather(d, cols), regressors);
}

double adjusted_effect(const Dataset& d, std::size_t x, std::size_t y, std::span<const std::size_t> z) {
  std::vector<std::size_t> cols{x};
  cols.insert(cols.end(), z.begin(), z.end());
  std::vector<std::string> names;
  for (std::size_t c : cols) names.push_back(d.name(c));
  return ols_matrix(d.column(y), gather(d, cols), names).coefficients(0);
}

double adjusted_effect(const Dataset& d, const std::string& x, const std::string& y,
                       const std::vector<std::string>& z) {
  const auto zi = indices_of(d, z);
  return adjusted_effect(d, d.index_of(x), d.index_of(y), zi);
}

double partial_correlation(const Dataset& d, const std::string& a, const std::string& b,
                           const std::vector<std::string>& cond) {
  const auto ci = indices_of(d, cond);
  if (d.rows() <= cond.size() + 3)
    throw std::invalid_argument("partial_correlation: need n > |cond| + 3");
  const Eigen::MatrixXd c = gather(d, ci);
  const Eigen::VectorXd ra = residualize(d.column(d.index_of(a)), c);
  const Eigen::VectorXd rb = residualize(d.column(d.index_of(b)), c);
  const double va = ra.squaredNorm();
  const double vb = rb.squaredNorm();
  const double scale = static_cast<double>(d.rows());
  if (va <= 1e-24 * scale || vb <= 1e-24 * scale)
    throw std::runtime_error("partial_correlation: degenerate residual variance");
  double r = ra.dot(rb) / std::sqrt(va * vb);
  return std::clamp(r, -1.0, 1.0);
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

CiResult fisher_z_from_r(double r, std::size_t n, std::size_t cond_size, double alpha) {
  CiResult res;
  res.cond_size = cond_size;
  if (n < cond_size + 4) {
    res.underpowered = true;
    res.independent = false;
    res.p_value = 0.0;
    res.statistic = std::numeric_limits<double>::infinity();
    return res;
  }
  if (std::isnan(r) || std::abs(r) >= 1.0) {
    res.statistic = std::numeric_limits<double>::infinity();
    res.p_value = 0.0;
    res.independent = false;
    return res;
  }
  const double z = std::atanh(r);
  res.statistic = std::sqrt(static_cast<double>(n - cond_size - 3)) * std::abs(z);
  res.p_value = std::clamp(2.0 * normal_upper_tail(res.statistic), 0.0, 1.0);
  res.independent = res.p_value > alpha;
  return res;
}

CiResult fisher_z_test(const Dataset& d, const std::string& a, const std::string& b,
                       const std::vector<std::string>& cond, double alpha) {
  if (d.rows() < cond.size() + 4) return fisher_z_from_r(0.0, d.rows(), cond.size(), alpha);
  return fisher_z_from_r(partial_correlation(d, a, b, cond), d.rows(), cond.size(), alpha);
}

std::vector<CiResult> CiTest::test_many(std::size_t a, std::size_t b,
                                        const std::vector<std::vector<std::size_t>>& conds, double alpha) const {
  std::vector<CiResult> out;
  out.reserve(conds.size());
  for (const auto& c : conds) out.push_back(test(a, b, c, alpha));
  return out;
}

FisherZTest::FisherZTest(const Dataset& d) : FisherZTest(d.values()) {}

FisherZTest::FisherZTest(const Eigen::MatrixXd& values) : n_(static_cast<std::size_t>(values.rows())) {
  corr_ = kernels::correlation_from_scatter(kernels::moments_parallel(values).scatter);
}

CiResult FisherZTest::test(std::size_t a, std::size_t b, std::span<const std::size_t> cond, double alpha) const {
  kernels::PartialQuery q{a, b, std::vector<std::size_t>(cond.begin(), cond.end())};
  return fisher_z_from_r(kernels::partial_correlation_from_corr(corr_, q), n_, cond.size(), alpha);
}

std::vector<CiResult> FisherZTest::test_many(std::size_t a, std::size_t b,
                                             const std::vector<std::vector<std::size_t>>& conds,
                                             double alpha) const {
  std::vector<kernels::PartialQuery> queries;
  queries.reserve(conds.size());
  for (const auto& c : conds) queries.push_back({a, b, c});
  const auto r = kernels::partial_correlations_parallel(corr_, queries);
  std::vector<CiResult> out;
  out.reserve(conds.size());
  for (std::size_t i = 0; i < conds.size(); ++i)
    out.push_back(fisher_z_from_r(r[i], n_, conds[i].size(), alpha));
  return out;
}

}  // namespace cmio
