#include <doctest.h>

#include <cmath>

#include "cmio/kernels.hpp"
#include "cmio/rng.hpp"

using namespace cmio::kernels;

namespace {

Eigen::MatrixXd random_matrix(std::uint64_t seed, Eigen::Index n, Eigen::Index p) {
  cmio::Rng rng(seed);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal() + 0.1 * static_cast<double>(j);
  return x;
}

}  // namespace

TEST_CASE("moments: serial and parallel agree with a direct computation") {
  const Eigen::MatrixXd x = random_matrix(1, 137, 9);
  const Moments s = moments_serial(x);
  const Moments p = moments_parallel(x);
  const Eigen::VectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - mean.transpose();
  const Eigen::MatrixXd scatter = c.transpose() * c;
  CHECK((s.mean - mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s.scatter - scatter).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((p.scatter - s.scatter).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((p.mean - s.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((p.scatter - p.scatter.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("correlation from scatter") {
  Eigen::MatrixXd x = random_matrix(2, 50, 4);
  x.col(3).setConstant(2.0);
  const Eigen::MatrixXd corr = correlation_from_scatter(moments_serial(x).scatter);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(corr(j, j) == doctest::Approx(1.0));
  CHECK(std::isnan(corr(3, 0)));
  CHECK(std::isnan(corr(0, 3)));
  CHECK(std::abs(corr(0, 1)) <= 1.0);
}

TEST_CASE("partial correlations: serial and parallel agree") {
  const Eigen::MatrixXd x = random_matrix(3, 400, 12);
  const Eigen::MatrixXd corr = correlation_from_scatter(moments_serial(x).scatter);
  std::vector<PartialQuery> qs;
  cmio::Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    PartialQuery q;
    q.a = rng.below(6);
    q.b = 6 + rng.below(6);
    for (std::size_t c = 0; c < 12; ++c)
      if (c != q.a && c != q.b && rng.uniform() < 0.4) q.cond.push_back(c);
    qs.push_back(q);
  }
  const auto s = partial_correlations_serial(corr, qs);
  const auto p = partial_correlations_parallel(corr, qs);
  REQUIRE(s.size() == qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    CHECK(s[i] == p[i]);
    CHECK(s[i] == doctest::Approx(partial_correlation_from_corr(corr, qs[i])).epsilon(1e-12));
    CHECK(std::abs(s[i]) <= 1.0);
  }
}

TEST_CASE("degenerate queries give NaN") {
  Eigen::MatrixXd x = random_matrix(5, 100, 4);
  x.col(2) = x.col(0);
  const Eigen::MatrixXd corr = correlation_from_scatter(moments_serial(x).scatter);
  CHECK(std::isnan(partial_correlation_from_corr(corr, {0, 1, {2}})));
  CHECK_FALSE(std::isnan(partial_correlation_from_corr(corr, {1, 3, {0}})));
}
