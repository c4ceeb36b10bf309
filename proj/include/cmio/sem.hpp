#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cmio/dataset.hpp"
#include "cmio/graph.hpp"
#include "cmio/graph_io.hpp"

namespace cmio {

enum class Link { linear, logistic };

/// Structural equation model over a Dag.
///
/// Linear node:   v = sum_j coeff(p_j, v) * p_j + N(0, noise_var(v))
/// Logistic node: v ~ Bernoulli(expit(sum_j coeff(p_j, v) * p_j))
///
/// `coeff[v]` is aligned with `graph.parent_indices(v)`. Logistic nodes carry
/// noise_var 0. Nodes flagged latent are generated but dropped from samples.
struct LinearSem {
  Dag graph;
  std::vector<std::vector<double>> coeff;
  std::vector<double> noise_var;
  std::vector<Link> link;
  std::vector<char> latent;
  std::size_t treatment = 0;
  std::size_t outcome = 0;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;

  double coefficient(std::string_view parent, std::string_view child) const;
  NodeSet latent_set() const;
  /// Observed covariate names (not treatment, outcome or latent), node order.
  std::vector<std::string> observed_covariates() const;
  const std::string& treatment_name() const { return graph.name(treatment); }
  const std::string& outcome_name() const { return graph.name(outcome); }
};

struct Intervention {
  std::string target;
  double value = 0.0;
};

/// Builds a model from a parsed model file. Missing weights default to 1,
/// missing noise variances to 1, missing links to linear. Treatment and
/// outcome directives are required.
LinearSem sem_from_file(const EdgeListFile& file);
LinearSem read_sem_file(const std::string& path);
/// Inverse of sem_from_file; output parses back to an identical model.
std::string format_sem(const LinearSem& m);

/// n i.i.d. rows. One Rng stream seeded with `seed`; rows are generated in
/// order, nodes within a row in topological order, one normal draw per
/// linear node and one uniform per logistic node.
Dataset sample(const LinearSem& m, std::size_t n, std::uint64_t seed);

/// Like sample() with the target's equation replaced by a constant. The
/// target's own draw is still consumed so that streams with the same seed
/// stay aligned across different intervention values.
Dataset sample_do(const LinearSem& m, const Intervention& iv, std::size_t n, std::uint64_t seed);

/// Sum over directed x -> y paths of coefficient products. Zero when y does
/// not descend from x. Every node on such a path after x must be linear.
double true_total_effect(const LinearSem& m, std::string_view x, std::string_view y);

/// Same model with `hidden` added to the latent set.
LinearSem hide(const LinearSem& m, const NodeSet& hidden);

/// Population covariance of all nodes (node order) of an all-linear model.
Eigen::MatrixXd implied_covariance(const LinearSem& m);

/// The three simulation designs with 100 covariates Z1..Z100, binary
/// treatment X and continuous outcome Y:
///   1: Z ~ N(0, I); X ~ Bern(expit(Z1+..+Z10+Z21+..+Z30)); Y = 0.5 X + 0.6 (Z1+..+Z20) + N(0,1)
///   2: as 1 but Z equicorrelated (0.5) through a latent factor F
///   3: Z as in 2; X ~ Bern(expit(0.5 Z1 - 0.5 Z2 + 0.3 Z5 - 0.3 Z6 + 0.35 Z7 + 0.4 Z8));
///      Y = X + 2 (Z1+..+Z4) + N(0,1)
LinearSem case_model(int id);
std::pair<LinearSem, Dataset> make_case(int id, std::size_t n, std::uint64_t seed);

/// Treatment effect written on the X term of the outcome equation for the
/// simulation designs (0.5, 0.5, 1.0).
double case_true_effect(int id);

/// Five-node chain Z1 -> X -> Y, Z1 -> Z2 -> Y, Z2 -> Z3 with unit
/// coefficients. Noise variances: Z1, X, Z2, Y get 1 and Z3 gets
/// `z3_noise` (default 0.5), which makes Z3 the better single proxy for Z2.
/// Z2 is latent when `hide_z2` is set.
LinearSem chain_model(bool hide_z2, double z3_noise = 0.5);

}  // namespace cmio
