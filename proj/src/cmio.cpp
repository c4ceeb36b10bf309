#include "cmio/cmio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cmio/stats.hpp"

namespace cmio {

std::string_view to_string(CiPolicy p) { return p == CiPolicy::literal ? "literal" : "near_full"; }

CiPolicy parse_ci_policy(std::string_view s) {
  if (s == "literal") return CiPolicy::literal;
  if (s == "near_full") return CiPolicy::near_full;
  throw std::invalid_argument("unknown CI policy: " + std::string(s));
}

std::string_view to_string(Algorithm a) { return a == Algorithm::alg1 ? "alg1" : "alg2"; }

Algorithm parse_algorithm(std::string_view s) {
  if (s == "alg1") return Algorithm::alg1;
  if (s == "alg2") return Algorithm::alg2;
  throw std::invalid_argument("unknown algorithm: " + std::string(s));
}

std::string_view to_string(StepOutcome o) {
  switch (o) {
    case StepOutcome::added: return "added";
    case StepOutcome::stopped: return "stopped";
    case StepOutcome::not_nested: return "not_nested";
  }
  return "?";
}

namespace {

using Index = std::vector<std::size_t>;

// Subsets of `prev` (positions) to condition on.
std::vector<Index> conditioning_sets(const Index& prev, const CmioOptions& opts) {
  const std::size_t m = prev.size();
  std::vector<Index> out;
  auto pick = [&](const std::vector<char>& keep) {
    Index s;
    for (std::size_t i = 0; i < m; ++i)
      if (keep[i]) s.push_back(prev[i]);
    out.push_back(std::move(s));
  };
  if (opts.policy == CiPolicy::literal) {
    if (m <= opts.all_subsets_limit) {
      for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        std::vector<char> keep(m);
        for (std::size_t i = 0; i < m; ++i) keep[i] = (mask >> i) & 1U;
        pick(keep);
      }
      return out;
    }
    pick(std::vector<char>(m, 0));
    pick(std::vector<char>(m, 1));
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<char> keep(m, 1);
      keep[i] = 0;
      pick(keep);
    }
    return out;
  }
  // near_full: drop every combination of at most `complement_depth` members.
  const std::size_t depth = std::min(opts.complement_depth, m);
  for (std::size_t r = 0; r <= depth; ++r) {
    std::vector<char> drop(m, 0);
    std::fill(drop.begin(), drop.begin() + static_cast<long>(r), 1);
    // prev_permutation walks all r-combinations in lexicographic order.
    do {
      std::vector<char> keep(m);
      for (std::size_t i = 0; i < m; ++i) keep[i] = !drop[i];
      pick(keep);
    } while (std::prev_permutation(drop.begin(), drop.end()));
  }
  return out;
}

std::vector<std::string> names_of(const Dataset& d, const Index& cols) {
  std::vector<std::string> out;
  out.reserve(cols.size());
  for (std::size_t c : cols) out.push_back(d.name(c));
  return out;
}

CiDecision decision(const Dataset& d, std::size_t var, const Index& cond, const CiResult& r) {
  return {d.name(var), names_of(d, cond), r.p_value, r.independent, r.underpowered};
}

Index sorted(Index v) {
  std::sort(v.begin(), v.end());
  return v;
}

void finish_estimate(const Dataset& d, SelectionReport& rep, const Index& selected) {
  rep.selected = names_of(d, selected);
  rep.effect_estimate = adjusted_effect(d, d.treatment(), d.outcome(), selected);
}

SelectionReport select_alg1(const Dataset& d, const CmioOptions& opts, Index& selected, const FisherZTest& ci) {
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const auto& cov = d.covariates();
  const std::size_t p = cov.size();
  const std::size_t n = d.rows();
  if (p == 0) throw std::invalid_argument("cmio: dataset has no covariates");
  if (n < 5) throw std::invalid_argument("cmio: need at least 5 rows");

  SelectionReport rep;
  rep.treatment = d.name(d.treatment());
  rep.outcome = d.name(d.outcome());
  rep.alpha_level = opts.alpha;
  rep.policy = opts.policy;
  rep.max_k = std::min(p, n - 4);
  if (opts.max_k) rep.max_k = std::min(rep.max_k, *opts.max_k);

  const SubsetProblem prob = SubsetProblem::from_dataset(d, 0);
  const SubsetSolver solver(prob.design, prob.response, true, std::nullopt, prob.covariate_names);

  Index prev;       // Z^{k-1} as covariate positions
  Index chosen;     // O as covariate positions
  std::size_t k = 1;
  for (; k <= rep.max_k; ++k) {
    SolverConfig cfg = opts.solver;
    if (!prev.empty()) cfg.warm_supports.push_back(prev);
    SubsetSolution sol;
    try {
      sol = solver.solve(k, cfg);
    } catch (const std::exception& e) {
      throw SelectionError(std::string("subset solver failed at k = ") + std::to_string(k) + ": " + e.what(),
                           rep.per_k_trace);
    }
    KStep step;
    step.k = k;
    step.support = sol.support_names;
    step.objective = sol.objective;
    step.nested = std::includes(sol.support.begin(), sol.support.end(), prev.begin(), prev.end());
    if (!step.nested) {
      step.outcome = StepOutcome::not_nested;
      chosen = sol.support;
      prev = sol.support;
      rep.per_k_trace.push_back(std::move(step));
      continue;
    }
    Index added;
    std::set_difference(sol.support.begin(), sol.support.end(), prev.begin(), prev.end(), std::back_inserter(added));
    if (added.size() != 1) {
      // The support did not grow (can only happen if k exceeds the rank);
      // nothing new to test.
      step.outcome = StepOutcome::added;
      chosen = sol.support;
      prev = sol.support;
      rep.per_k_trace.push_back(std::move(step));
      continue;
    }
    const std::size_t var = cov[added[0]];
    step.new_variable = d.name(var);

    std::vector<Index> conds;
    for (const auto& a : conditioning_sets(prev, opts)) {
      Index c;
      if (opts.condition_on_treatment) c.push_back(d.treatment());
      for (std::size_t pos : a) c.push_back(cov[pos]);
      conds.push_back(sorted(std::move(c)));
    }
    const double level = opts.bonferroni ? opts.alpha / static_cast<double>(conds.size()) : opts.alpha;
    auto results = ci.test_many(var, d.outcome(), conds, level);
    if (opts.selection_adjusted) {
      // conditioning_sets() puts the full previous support first.
      auto& full = results.front();
      const double m = static_cast<double>(p - prev.size());
      full.p_value = -std::expm1(m * std::log1p(-full.p_value));
      full.independent = full.p_value > level;
    }
    bool separated = false;
    for (std::size_t i = 0; i < conds.size(); ++i) {
      step.ci_decisions.push_back(decision(d, var, conds[i], results[i]));
      separated = separated || results[i].independent;
    }
    if (separated) {
      step.outcome = StepOutcome::stopped;
      chosen = prev;
      rep.per_k_trace.push_back(std::move(step));
      break;
    }
    step.outcome = StepOutcome::added;
    chosen = sol.support;
    prev = sol.support;
    rep.per_k_trace.push_back(std::move(step));
  }
  rep.stopped_at_k = std::min(k, rep.max_k);
  selected.clear();
  for (std::size_t pos : chosen) selected.push_back(cov[pos]);
  selected = sorted(std::move(selected));
  return rep;
}

}  // namespace

SelectionReport cmio_select(const Dataset& d, const CmioOptions& opts) {
  const FisherZTest ci(d);
  Index selected;
  SelectionReport rep = select_alg1(d, opts, selected, ci);
  rep.algorithm = Algorithm::alg1;
  finish_estimate(d, rep, selected);
  rep.base_selection = rep.selected;
  return rep;
}

SelectionReport cmio_select(const Dataset& d, std::string_view x, std::string_view y, const CmioOptions& opts) {
  return cmio_select(d.with_roles(x, y), opts);
}

SelectionReport cmio_select_latent(const Dataset& d, const CmioOptions& opts) {
  const FisherZTest ci(d);
  Index base;
  SelectionReport rep = select_alg1(d, opts, base, ci);
  rep.algorithm = Algorithm::alg2;
  rep.base_selection = names_of(d, base);

  Index rest;
  for (std::size_t c : d.covariates())
    if (!std::binary_search(base.begin(), base.end(), c)) rest.push_back(c);

  Index with_x = base;
  with_x.push_back(d.treatment());
  with_x = sorted(std::move(with_x));

  // Pass 1: drop T independent of Y given X and the first selection.
  Index kept;
  for (std::size_t t : rest) {
    const auto r = ci.test(t, d.outcome(), with_x, opts.alpha);
    rep.pass1.push_back(decision(d, t, with_x, r));
    if (!r.independent) kept.push_back(t);
  }
  // Pass 2: drop T independent of Y given X, the first selection and the
  // other survivors of pass 1. All decisions use the pass-1 survivor set.
  Index survivors;
  for (std::size_t t : kept) {
    Index cond = with_x;
    for (std::size_t u : kept)
      if (u != t) cond.push_back(u);
    cond = sorted(std::move(cond));
    const auto r = ci.test(t, d.outcome(), cond, opts.alpha);
    rep.pass2.push_back(decision(d, t, cond, r));
    if (!r.independent) survivors.push_back(t);
  }
  Index selected = base;
  selected.insert(selected.end(), survivors.begin(), survivors.end());
  finish_estimate(d, rep, sorted(std::move(selected)));
  return rep;
}

SelectionReport cmio_select_latent(const Dataset& d, std::string_view x, std::string_view y,
                                   const CmioOptions& opts) {
  return cmio_select_latent(d.with_roles(x, y), opts);
}

SelectionReport run_selection(const Dataset& d, Algorithm a, const CmioOptions& opts) {
  return a == Algorithm::alg1 ? cmio_select(d, opts) : cmio_select_latent(d, opts);
}

SelectionEval evaluate_selection(const Dag& g, std::string_view x, std::string_view y, const NodeSet& selected) {
  SelectionEval ev;
  ev.valid = is_valid_adjustment(g, x, y, selected);
  const NodeSet target = optimal_adjustment(g, x, y);
  std::vector<std::string> diff;
  std::set_symmetric_difference(selected.begin(), selected.end(), target.begin(), target.end(),
                                std::back_inserter(diff));
  ev.set_difference = diff.size();
  ev.contains_target = std::includes(selected.begin(), selected.end(), target.begin(), target.end());
  return ev;
}

}  // namespace cmio
