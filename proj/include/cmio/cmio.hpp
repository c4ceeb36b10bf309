#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cmio/dataset.hpp"
#include "cmio/graph.hpp"
#include "cmio/subset.hpp"

namespace cmio {

enum class Algorithm { alg1, alg2 };

/// Which conditioning sets A are used when checking that the variable added
/// at step k is dependent on Y given A, for A drawn from the previous support.
enum class CiPolicy {
  /// Every A while the previous support has at most `all_subsets_limit`
  /// members; beyond that only the empty set, the full set and the
  /// single-element complements.
  literal,
  /// The full previous support and every set obtained by dropping up to
  /// `complement_depth` of its members.
  near_full,
};

std::string_view to_string(CiPolicy p);
CiPolicy parse_ci_policy(std::string_view s);
std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

struct CmioOptions {
  double alpha = 0.05;
  SolverConfig solver;
  CiPolicy policy = CiPolicy::near_full;
  std::size_t complement_depth = 2;
  std::size_t all_subsets_limit = 12;
  /// Add the treatment to every conditioning set.
  bool condition_on_treatment = true;
  /// Divide alpha by the number of tests made for one candidate.
  bool bonferroni = false;
  /// The candidate added at a nested step is the one with the largest partial
  /// correlation given X and Z^{k-1} among the m covariates outside Z^{k-1},
  /// so its full-set p-value is the minimum of m. When set, that p-value is
  /// replaced by 1 - (1 - p)^m before the decision.
  bool selection_adjusted = true;
  /// Upper bound on k below the automatic min(p, n - 4).
  std::optional<std::size_t> max_k;
};

struct CiDecision {
  std::string variable;
  std::vector<std::string> conditioning;
  double p_value = 1.0;
  bool independent = false;
  bool underpowered = false;
};

enum class StepOutcome { added, stopped, not_nested };
std::string_view to_string(StepOutcome o);

struct KStep {
  std::size_t k = 0;
  std::vector<std::string> support;
  double objective = 0.0;
  bool nested = false;
  std::optional<std::string> new_variable;
  std::vector<CiDecision> ci_decisions;
  StepOutcome outcome = StepOutcome::added;
};

struct SelectionReport {
  Algorithm algorithm = Algorithm::alg1;
  std::string treatment;
  std::string outcome;
  /// Selected covariates in dataset column order.
  std::vector<std::string> selected;
  std::vector<KStep> per_k_trace;
  std::size_t stopped_at_k = 0;
  std::size_t max_k = 0;
  double effect_estimate = 0.0;
  double alpha_level = 0.05;
  CiPolicy policy = CiPolicy::near_full;
  /// Output of the first algorithm (equal to `selected` for alg1).
  std::vector<std::string> base_selection;
  /// Hidden-variable passes (alg2 only).
  std::vector<CiDecision> pass1;
  std::vector<CiDecision> pass2;
};

/// Thrown when the subset solver fails mid-run; carries the trace so far.
class SelectionError : public std::runtime_error {
 public:
  SelectionError(const std::string& what, std::vector<KStep> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<KStep>& trace() const { return trace_; }

 private:
  std::vector<KStep> trace_;
};

/// Causal covariate selection assuming no hidden confounders: grow the
/// k-sparse support one step at a time and stop when the newly added
/// variable can be made independent of Y.
SelectionReport cmio_select(const Dataset& d, const CmioOptions& opts = {});
SelectionReport cmio_select(const Dataset& d, std::string_view x, std::string_view y, const CmioOptions& opts = {});

/// Hidden-variable version: the selection above plus the covariates left out
/// of it that stay dependent on Y in two pruning passes.
SelectionReport cmio_select_latent(const Dataset& d, const CmioOptions& opts = {});
SelectionReport cmio_select_latent(const Dataset& d, std::string_view x, std::string_view y,
                                   const CmioOptions& opts = {});

SelectionReport run_selection(const Dataset& d, Algorithm a, const CmioOptions& opts = {});

struct SelectionEval {
  bool valid = false;
  std::size_t set_difference = 0;
  bool contains_target = false;
};

/// Scores a selection against the generating graph: back-door validity, size
/// of the symmetric difference with PA(y) \ {x}, and whether it contains it.
SelectionEval evaluate_selection(const Dag& g, std::string_view x, std::string_view y, const NodeSet& selected);

}  // namespace cmio
