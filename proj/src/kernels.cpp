#include "cmio/kernels.hpp"

#include <cmath>
#include <limits>

namespace cmio::kernels {

namespace {

Eigen::VectorXd column_means(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::VectorXd mean(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += x(i, j);
    mean(j) = n > 0 ? s / static_cast<double>(n) : 0.0;
  }
  return mean;
}

}  // namespace

Moments moments_serial(const Eigen::MatrixXd& x) {
  Moments m;
  m.mean = column_means(x);
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  m.scatter.resize(p, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a; b < p; ++b) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) s += (x(i, a) - m.mean(a)) * (x(i, b) - m.mean(b));
      m.scatter(a, b) = s;
      m.scatter(b, a) = s;
    }
  }
  return m;
}

Moments moments_parallel(const Eigen::MatrixXd& x) {
  Moments m;
  m.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - m.mean.transpose();
  const Eigen::Index p = x.cols();
  m.scatter.resize(p, p);
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index b = 0; b < p; ++b) {
    m.scatter.col(b).noalias() = centered.transpose() * centered.col(b);
  }
  // Symmetrise exactly so downstream Cholesky sees a symmetric matrix.
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = a + 1; b < p; ++b) m.scatter(b, a) = m.scatter(a, b);
  return m;
}

Eigen::MatrixXd correlation_from_scatter(const Eigen::MatrixXd& scatter) {
  const Eigen::Index p = scatter.rows();
  Eigen::VectorXd inv_sd(p);
  for (Eigen::Index j = 0; j < p; ++j)
    inv_sd(j) = scatter(j, j) > 0 ? 1.0 / std::sqrt(scatter(j, j)) : std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd corr = inv_sd.asDiagonal() * scatter * inv_sd.asDiagonal();
  for (Eigen::Index j = 0; j < p; ++j)
    if (!std::isnan(inv_sd(j))) corr(j, j) = 1.0;
  return corr;
}

double partial_correlation_from_corr(const Eigen::MatrixXd& corr, const PartialQuery& q) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  const auto a = static_cast<Eigen::Index>(q.a);
  const auto b = static_cast<Eigen::Index>(q.b);
  const auto k = static_cast<Eigen::Index>(q.cond.size());
  double caa = corr(a, a), cbb = corr(b, b), cab = corr(a, b);
  if (k > 0) {
    Eigen::MatrixXd css(k, k);
    Eigen::VectorXd csa(k), csb(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto si = static_cast<Eigen::Index>(q.cond[static_cast<std::size_t>(i)]);
      csa(i) = corr(si, a);
      csb(i) = corr(si, b);
      for (Eigen::Index j = 0; j < k; ++j)
        css(i, j) = corr(si, static_cast<Eigen::Index>(q.cond[static_cast<std::size_t>(j)]));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(css);
    if (llt.info() != Eigen::Success) return kNaN;
    const Eigen::VectorXd wa = llt.matrixL().solve(csa);
    const Eigen::VectorXd wb = llt.matrixL().solve(csb);
    caa -= wa.squaredNorm();
    cbb -= wb.squaredNorm();
    cab -= wa.dot(wb);
  }
  if (!(caa > 1e-14) || !(cbb > 1e-14)) return kNaN;
  double r = cab / std::sqrt(caa * cbb);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

std::vector<double> partial_correlations_serial(const Eigen::MatrixXd& corr,
                                                const std::vector<PartialQuery>& queries) {
  std::vector<double> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = partial_correlation_from_corr(corr, queries[i]);
  return out;
}

std::vector<double> partial_correlations_parallel(const Eigen::MatrixXd& corr,
                                                  const std::vector<PartialQuery>& queries) {
  std::vector<double> out(queries.size());
  const auto count = static_cast<long>(queries.size());
#pragma omp parallel for schedule(dynamic, 8) if (count > 64)
  for (long i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = partial_correlation_from_corr(corr, queries[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace cmio::kernels
