#include "cmio/subset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "cmio/kernels.hpp"
#include "cmio/rng.hpp"
#include "cmio/stats.hpp"

namespace cmio {

namespace {

constexpr std::size_t kMaxSwapRounds = 100;

bool lex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<std::size_t> random_support(std::size_t p, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> pool(p);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(p - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Indices of the k largest |v(offset + j)|, ties to the lower index.
std::vector<std::size_t> top_k(const Eigen::VectorXd& v, std::size_t offset, std::size_t count, std::size_t k,
                               const std::vector<char>* exclude = nullptr) {
  std::vector<std::size_t> idx;
  idx.reserve(count);
  for (std::size_t j = 0; j < count; ++j)
    if (!exclude || !(*exclude)[j]) idx.push_back(j);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(k), idx.end(), [&](std::size_t a, std::size_t b) {
    const double va = std::abs(v(static_cast<Eigen::Index>(offset + a)));
    const double vb = std::abs(v(static_cast<Eigen::Index>(offset + b)));
    return va > vb || (va == vb && a < b);
  });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

SubsetProblem SubsetProblem::from_dataset(const Dataset& d, std::size_t k, const std::vector<std::size_t>& columns) {
  const auto& cols = columns.empty() ? d.covariates() : columns;
  SubsetProblem prob;
  prob.k = k;
  prob.design.resize(static_cast<Eigen::Index>(d.rows()), static_cast<Eigen::Index>(cols.size() + 1));
  prob.design.col(0) = d.column(d.treatment());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    prob.design.col(static_cast<Eigen::Index>(j + 1)) = d.column(cols[j]);
    prob.covariate_names.push_back(d.name(cols[j]));
  }
  prob.response = d.column(d.outcome());
  return prob;
}

struct SubsetSolver::Run {
  Eigen::VectorXd theta;
  std::vector<std::size_t> support;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<TraceStep> trace;
};

SubsetSolver::SubsetSolver(const Eigen::MatrixXd& design, const Eigen::VectorXd& response, bool standardize,
                           std::optional<double> box_bound, std::vector<std::string> names)
    : box_bound_(box_bound), names_(std::move(names)) {
  if (design.cols() < 1) throw std::invalid_argument("subset: design needs a treatment column");
  if (design.rows() < 1) throw std::invalid_argument("subset: need at least one row");
  if (response.size() != design.rows()) throw std::invalid_argument("subset: response length mismatch");
  if (!design.allFinite() || !response.allFinite()) throw std::invalid_argument("subset: non-finite data");
  if (box_bound_ && !(*box_bound_ > 0.0)) throw std::invalid_argument("subset: box bound must be positive");
  n_ = static_cast<std::size_t>(design.rows());
  p_ = static_cast<std::size_t>(design.cols() - 1);
  if (!names_.empty() && names_.size() != p_) throw std::invalid_argument("subset: covariate name count mismatch");

  const Eigen::Index m = design.cols();
  Eigen::MatrixXd joint(design.rows(), m + 1);
  joint.leftCols(m) = design;
  joint.col(m) = response;
  const auto mom = kernels::moments_parallel(joint);

  mean_ = mom.mean.head(m);
  y_mean_ = mom.mean(m);
  scale_ = Eigen::VectorXd::Ones(m);
  if (standardize) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double s = std::sqrt(mom.scatter(j, j));
      if (s > 0.0) scale_(j) = s;
    }
  }
  const Eigen::VectorXd inv = scale_.cwiseInverse();
  gram_ = inv.asDiagonal() * mom.scatter.topLeftCorner(m, m) * inv.asDiagonal();
  cross_ = inv.asDiagonal() * mom.scatter.col(m).head(m);
  yy_ = mom.scatter(m, m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_, Eigen::EigenvaluesOnly);
  lipschitz_ = std::max(eig.eigenvalues().maxCoeff(), std::numeric_limits<double>::min());
}

double SubsetSolver::objective(const Eigen::VectorXd& theta) const {
  const double g = 0.5 * yy_ - cross_.dot(theta) + 0.5 * theta.dot(gram_ * theta);
  return std::max(g, 0.0);
}

Eigen::VectorXd SubsetSolver::gradient(const Eigen::VectorXd& theta) const { return gram_ * theta - cross_; }

Eigen::VectorXd SubsetSolver::polish(const std::vector<std::size_t>& support) const {
  const auto m = static_cast<Eigen::Index>(support.size() + 1);
  std::vector<Eigen::Index> idx;
  idx.reserve(support.size() + 1);
  idx.push_back(0);
  for (std::size_t s : support) idx.push_back(static_cast<Eigen::Index>(s + 1));
  Eigen::MatrixXd g(m, m);
  Eigen::VectorXd c(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    c(i) = cross_(idx[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m; ++j) g(i, j) = gram_(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  Eigen::VectorXd sol;
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() == Eigen::Success) sol = llt.solve(c);
  if (sol.size() != m || !sol.allFinite()) sol = g.completeOrthogonalDecomposition().solve(c);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p_ + 1));
  for (Eigen::Index i = 0; i < m; ++i) theta(idx[static_cast<std::size_t>(i)]) = sol(i);
  if (box_bound_)
    for (Eigen::Index j = 1; j < theta.size(); ++j) theta(j) = std::clamp(theta(j), -*box_bound_, *box_bound_);
  return theta;
}

double SubsetSolver::support_objective(const std::vector<std::size_t>& support) const {
  return objective(polish(support));
}

std::vector<std::size_t> SubsetSolver::threshold(Eigen::VectorXd& theta, std::size_t k) const {
  auto keep = top_k(theta, 1, p_, k);
  std::vector<char> mask(p_, 0);
  for (std::size_t s : keep) mask[s] = 1;
  for (std::size_t j = 0; j < p_; ++j) {
    auto& t = theta(static_cast<Eigen::Index>(j + 1));
    if (!mask[j]) t = 0.0;
    else if (box_bound_) t = std::clamp(t, -*box_bound_, *box_bound_);
  }
  return keep;
}

SubsetSolver::Run SubsetSolver::run_from(std::vector<std::size_t> support, std::size_t k, const SolverConfig& cfg,
                                         double step) const {
  Run r;
  std::sort(support.begin(), support.end());
  r.theta = polish(support);
  r.support = std::move(support);
  r.objective = objective(r.theta);
  const bool keep_trace = cfg.record_trace || cfg.verify_descent;
  if (keep_trace) r.trace.push_back({0, r.objective, StepKind::start, 0.0});

  std::size_t stable = 0;
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    Eigen::VectorXd eta = r.theta - gradient(r.theta) / step;
    auto sup = threshold(eta, k);
    const double g_eta = objective(eta);
    const double step_sq = (eta - r.theta).squaredNorm();

    if (cfg.verify_descent && step > lipschitz_) {
      const double bound = 0.5 * (step - lipschitz_) * step_sq;
      const double slack = 1e-9 * std::max(1.0, r.objective);
      if (r.objective - g_eta < bound - slack)
        throw std::logic_error("sufficient-decrease inequality violated at iteration " + std::to_string(it));
    }
    if (g_eta > r.objective) {
      // Only reachable through rounding at a stationary point.
      r.converged = true;
      break;
    }
    const bool stalled = r.objective - g_eta <= cfg.tolerance * r.objective;
    stable = sup == r.support ? stable + 1 : 0;
    r.theta = std::move(eta);
    r.support = std::move(sup);
    r.objective = g_eta;
    r.iterations = it;
    if (keep_trace) r.trace.push_back({it, g_eta, StepKind::gradient, step_sq});

    if (stable >= cfg.stable_window || stalled) {
      Eigen::VectorXd pol = polish(r.support);
      const double g_pol = objective(pol);
      if (g_pol <= r.objective) {
        if (keep_trace) r.trace.push_back({it, g_pol, StepKind::polish, (pol - r.theta).squaredNorm()});
        r.theta = std::move(pol);
        r.objective = g_pol;
      }
      Eigen::VectorXd probe = r.theta - gradient(r.theta) / step;
      if (threshold(probe, k) == r.support) {
        r.converged = true;
        break;
      }
      stable = 0;
    }
  }
  return r;
}

void SubsetSolver::swap_search(Run& run, std::size_t k) const {
  if (k == 0 || k >= p_) return;
  std::vector<char> in(p_, 0);
  for (std::size_t s : run.support) in[s] = 1;
  double best = run.objective;
  std::vector<std::size_t> best_support;
  for (std::size_t pos = 0; pos < run.support.size(); ++pos) {
    for (std::size_t j = 0; j < p_; ++j) {
      if (in[j]) continue;
      auto cand = run.support;
      cand[pos] = j;
      std::sort(cand.begin(), cand.end());
      const double g = support_objective(cand);
      if (g < best - 1e-12 * std::max(best, 1e-300) || (g == best && !best_support.empty() && lex_less(cand, best_support))) {
        best = g;
        best_support = std::move(cand);
      }
    }
  }
  if (best_support.empty()) return;
  run.support = std::move(best_support);
  run.theta = polish(run.support);
  run.objective = objective(run.theta);
  if (!run.trace.empty()) run.trace.push_back({run.iterations, run.objective, StepKind::swap, 0.0});
}

SubsetSolution SubsetSolver::finish(const Run& run) const {
  SubsetSolution sol;
  sol.support = run.support;
  for (std::size_t s : sol.support)
    sol.support_names.push_back(names_.empty() ? "Z" + std::to_string(s + 1) : names_[s]);
  sol.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p_));
  for (std::size_t j = 0; j < p_; ++j)
    sol.beta(static_cast<Eigen::Index>(j)) = run.theta(static_cast<Eigen::Index>(j + 1)) / scale_(static_cast<Eigen::Index>(j + 1));
  sol.alpha = run.theta(0) / scale_(0);
  sol.intercept = y_mean_ - sol.alpha * mean_(0) - sol.beta.dot(mean_.tail(static_cast<Eigen::Index>(p_)));
  sol.objective = run.objective;
  sol.iterations = run.iterations;
  sol.converged = run.converged;
  sol.lipschitz = lipschitz_;
  sol.trace = run.trace;
  return sol;
}

SubsetSolution SubsetSolver::solve(std::size_t k, const SolverConfig& cfg) const {
  if (k > p_) throw std::invalid_argument("subset: k = " + std::to_string(k) + " exceeds p = " + std::to_string(p_));
  if (!(cfg.step_factor >= 1.0)) throw std::invalid_argument("subset: step factor must be >= 1 (L >= l)");
  const double step = cfg.step_factor * lipschitz_;

  std::vector<std::vector<std::size_t>> starts;
  {
    // Thresholded (minimum-norm) least squares.
    Eigen::VectorXd ls = gram_.completeOrthogonalDecomposition().solve(cross_);
    if (!ls.allFinite()) ls = cross_;
    starts.push_back(top_k(ls, 1, p_, k));
  }
  for (const auto& w : cfg.warm_supports) {
    std::vector<std::size_t> ws;
    for (std::size_t s : w) {
      if (s >= p_) throw std::invalid_argument("subset: warm support index out of range");
      ws.push_back(s);
    }
    std::sort(ws.begin(), ws.end());
    ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
    const Eigen::VectorXd theta = polish(ws);
    if (ws.size() > k) {
      ws = top_k(theta, 1, p_, k);
    } else if (ws.size() < k) {
      std::vector<char> in(p_, 0);
      for (std::size_t s : ws) in[s] = 1;
      const auto extra = top_k(gradient(theta), 1, p_, k - ws.size(), &in);
      ws.insert(ws.end(), extra.begin(), extra.end());
      std::sort(ws.begin(), ws.end());
    }
    starts.push_back(std::move(ws));
  }
  const bool trivial = k == 0 || k == p_;
  if (!trivial)
    for (std::size_t r = starts.size(); r < cfg.restarts; ++r)
      starts.push_back(random_support(p_, k, child_seed(cfg.seed, r)));
  if (trivial) starts.resize(1);

  std::vector<Run> runs(starts.size());
  const auto count = static_cast<long>(starts.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i)
    runs[static_cast<std::size_t>(i)] = run_from(starts[static_cast<std::size_t>(i)], k, cfg, step);

  auto better = [](const Run& a, const Run& b) {
    return a.objective < b.objective || (a.objective == b.objective && lex_less(a.support, b.support));
  };
  std::vector<std::size_t> order(runs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return better(runs[a], runs[b]); });

  // Swap-polish the best few distinct local optima, not just the winner.
  std::vector<std::size_t> picked;
  for (std::size_t i : order) {
    if (picked.size() >= (cfg.swap_polish && !trivial ? cfg.polish_candidates : 1)) break;
    if (std::none_of(picked.begin(), picked.end(), [&](std::size_t j) { return runs[j].support == runs[i].support; }))
      picked.push_back(i);
  }
  std::vector<Run> polished(picked.size());
  const auto npicked = static_cast<long>(picked.size());
#pragma omp parallel for schedule(dynamic)
  for (long c = 0; c < npicked; ++c) {
    Run winner = std::move(runs[picked[static_cast<std::size_t>(c)]]);
    if (cfg.swap_polish && !trivial) {
      for (std::size_t round = 0; round < kMaxSwapRounds; ++round) {
        const double before = winner.objective;
        const auto before_support = winner.support;
        swap_search(winner, k);
        if (winner.support == before_support) break;
        // Re-run the gradient iteration from the improved support so the
        // returned point is again a fixed point of the thresholded step.
        Run again = run_from(winner.support, k, cfg, step);
        if (!winner.trace.empty()) {
          for (auto& t : again.trace) t.iteration += winner.iterations;
          again.trace.insert(again.trace.begin(), winner.trace.begin(), winner.trace.end());
        }
        again.iterations += winner.iterations;
        if (again.objective <= winner.objective) winner = std::move(again);
        if (!(winner.objective < before)) break;
      }
    }
    polished[static_cast<std::size_t>(c)] = std::move(winner);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < polished.size(); ++i)
    if (better(polished[i], polished[best])) best = i;
  Run winner = std::move(polished[best]);

  SubsetSolution sol = finish(winner);
  sol.step_constant = step;
  return sol;
}

SubsetSolution solve_k_sparse(const SubsetProblem& problem, const SolverConfig& cfg) {
  if (problem.k > problem.p())
    throw std::invalid_argument("subset: k = " + std::to_string(problem.k) + " exceeds p = " + std::to_string(problem.p()));
  SubsetSolver solver(problem.design, problem.response, problem.standardize, problem.box_bound,
                      problem.covariate_names);
  return solver.solve(problem.k, cfg);
}

SubsetSolution solve_exhaustive(const SubsetProblem& problem, std::size_t max_p) {
  const std::size_t p = problem.p();
  if (p > max_p)
    throw std::invalid_argument("exhaustive search capped at p = " + std::to_string(max_p) + ", got " + std::to_string(p));
  if (problem.k > p) throw std::invalid_argument("subset: k exceeds p");
  if (problem.box_bound) throw std::invalid_argument("exhaustive search does not support a box bound");
  const std::size_t k = problem.k;
  const Eigen::Index n = problem.design.rows();

  // Supports of size exactly k: adding a column never raises the least-squares
  // objective, so the best k-support is also best among all smaller ones.
  std::vector<std::size_t> cur(k);
  std::iota(cur.begin(), cur.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_support;
  RegressionFit best_fit;
  while (true) {
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(k + 1));
    x.col(0) = problem.design.col(0);
    for (std::size_t j = 0; j < k; ++j) x.col(static_cast<Eigen::Index>(j + 1)) = problem.design.col(static_cast<Eigen::Index>(cur[j] + 1));
    RegressionFit fit = ols_matrix(problem.response, x);
    const double g = 0.5 * fit.rss;
    if (g < best) {
      best = g;
      best_support = cur;
      best_fit = std::move(fit);
    }
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && cur[i - 1] == p - k + (i - 1)) --i;
    if (i == 0) break;
    ++cur[i - 1];
    for (std::size_t j = i; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }

  SubsetSolution sol;
  sol.support = best_support;
  for (std::size_t s : sol.support)
    sol.support_names.push_back(problem.covariate_names.empty() ? "Z" + std::to_string(s + 1) : problem.covariate_names[s]);
  sol.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < k; ++j) sol.beta(static_cast<Eigen::Index>(best_support[j])) = best_fit.coefficients(static_cast<Eigen::Index>(j + 1));
  sol.alpha = best_fit.coefficients(0);
  sol.intercept = best_fit.intercept;
  sol.objective = best;
  sol.converged = true;
  return sol;
}

std::vector<double> objective_trace(const SubsetSolution& sol) {
  std::vector<double> out;
  out.reserve(sol.trace.size());
  for (const auto& t : sol.trace) out.push_back(t.objective);
  return out;
}

void write_trace_csv(std::ostream& out, const SubsetSolution& sol) {
  out << "iteration,objective\n";
  for (const auto& t : sol.trace) out << t.iteration << ',' << format_double(t.objective) << '\n';
}

}  // namespace cmio
