#include "cmio/sem.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cmio/rng.hpp"

namespace cmio {

namespace {

double expit(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

struct Builder {
  std::vector<std::string> nodes;
  std::vector<EdgeListFile::WeightedEdge> edges;
  std::map<std::string, double> noise;
  std::map<std::string, std::string> link;
  std::vector<std::string> latent;

  void edge(const std::string& p, const std::string& c, double w) { edges.push_back({p, c, w}); }

  LinearSem build(const std::string& treatment, const std::string& outcome) const {
    EdgeListFile f;
    f.nodes = nodes;
    f.edges = edges;
    f.noise = noise;
    f.link = link;
    f.latent = latent;
    f.treatment = treatment;
    f.outcome = outcome;
    return sem_from_file(f);
  }
};

std::string z(int i) { return "Z" + std::to_string(i); }

// Fills one row in topological order. `fixed` < 0 means no intervention.
void generate_row(const LinearSem& m, Rng& rng, std::vector<double>& row, long fixed, double fixed_value) {
  for (std::size_t v : m.graph.topological_order()) {
    const auto& pa = m.graph.parent_indices(v);
    double mean = 0.0;
    for (std::size_t j = 0; j < pa.size(); ++j) mean += m.coeff[v][j] * row[pa[j]];
    double value;
    if (m.link[v] == Link::linear) {
      value = mean + std::sqrt(m.noise_var[v]) * rng.normal();
    } else {
      value = rng.bernoulli(expit(mean)) ? 1.0 : 0.0;
    }
    row[v] = static_cast<long>(v) == fixed ? fixed_value : value;
  }
}

Dataset draw(const LinearSem& m, std::size_t n, std::uint64_t seed, long fixed, double fixed_value) {
  if (n < 1) throw std::invalid_argument("sample size must be at least 1");
  m.validate();
  std::vector<Column> columns;
  std::vector<std::size_t> source;
  for (std::size_t v = 0; v < m.graph.size(); ++v) {
    if (m.latent[v]) continue;
    Role role = v == m.treatment ? Role::treatment : (v == m.outcome ? Role::outcome : Role::covariate);
    columns.push_back({m.graph.name(v), role});
    source.push_back(v);
  }
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(source.size()));
  Rng rng(seed);
  std::vector<double> row(m.graph.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    generate_row(m, rng, row, fixed, fixed_value);
    for (std::size_t j = 0; j < source.size(); ++j)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[source[j]];
  }
  return Dataset(std::move(columns), std::move(values));
}

}  // namespace

void LinearSem::validate() const {
  const std::size_t n = graph.size();
  if (coeff.size() != n || noise_var.size() != n || link.size() != n || latent.size() != n)
    throw std::invalid_argument("sem: per-node tables do not match the graph");
  for (std::size_t v = 0; v < n; ++v) {
    if (coeff[v].size() != graph.parent_indices(v).size())
      throw std::invalid_argument("sem: coefficients of " + graph.name(v) + " do not match its parents");
    for (double c : coeff[v])
      if (!std::isfinite(c)) throw std::invalid_argument("sem: non-finite coefficient into " + graph.name(v));
    if (link[v] == Link::linear && !(noise_var[v] > 0.0 && std::isfinite(noise_var[v])))
      throw std::invalid_argument("sem: linear node " + graph.name(v) + " needs a positive noise variance");
    if (link[v] == Link::logistic && noise_var[v] != 0.0)
      throw std::invalid_argument("sem: logistic node " + graph.name(v) + " must not carry a noise variance");
  }
  if (treatment >= n || outcome >= n || treatment == outcome)
    throw std::invalid_argument("sem: treatment and outcome must be distinct nodes");
  if (latent[treatment] || latent[outcome])
    throw std::invalid_argument("sem: treatment and outcome cannot be latent");
}

double LinearSem::coefficient(std::string_view parent, std::string_view child) const {
  const std::size_t p = graph.index_of(parent);
  const std::size_t c = graph.index_of(child);
  const auto& pa = graph.parent_indices(c);
  for (std::size_t j = 0; j < pa.size(); ++j)
    if (pa[j] == p) return coeff[c][j];
  throw std::invalid_argument("no edge " + std::string(parent) + " -> " + std::string(child));
}

NodeSet LinearSem::latent_set() const {
  NodeSet out;
  for (std::size_t v = 0; v < graph.size(); ++v)
    if (latent[v]) out.insert(graph.name(v));
  return out;
}

std::vector<std::string> LinearSem::observed_covariates() const {
  std::vector<std::string> out;
  for (std::size_t v = 0; v < graph.size(); ++v)
    if (!latent[v] && v != treatment && v != outcome) out.push_back(graph.name(v));
  return out;
}

LinearSem sem_from_file(const EdgeListFile& file) {
  LinearSem m;
  m.graph = file.to_dag();
  const std::size_t n = m.graph.size();
  m.coeff.resize(n);
  for (std::size_t v = 0; v < n; ++v) m.coeff[v].assign(m.graph.parent_indices(v).size(), 1.0);
  for (const auto& e : file.edges) {
    const std::size_t c = m.graph.index_of(e.child);
    const std::size_t p = m.graph.index_of(e.parent);
    const auto& pa = m.graph.parent_indices(c);
    for (std::size_t j = 0; j < pa.size(); ++j)
      if (pa[j] == p) m.coeff[c][j] = e.weight.value_or(1.0);
  }
  m.link.assign(n, Link::linear);
  for (const auto& [name, l] : file.link)
    m.link[m.graph.index_of(name)] = l == "logistic" ? Link::logistic : Link::linear;
  m.noise_var.assign(n, 1.0);
  for (const auto& [name, var] : file.noise) {
    const std::size_t v = m.graph.index_of(name);
    if (m.link[v] == Link::logistic)
      throw std::invalid_argument("sem: logistic node " + name + " cannot have a noise variance");
    m.noise_var[v] = var;
  }
  for (std::size_t v = 0; v < n; ++v)
    if (m.link[v] == Link::logistic) m.noise_var[v] = 0.0;
  m.latent.assign(n, 0);
  for (const auto& name : file.latent) m.latent[m.graph.index_of(name)] = 1;
  if (!file.treatment || !file.outcome)
    throw std::invalid_argument("sem: model needs 'treatment' and 'outcome' directives");
  m.treatment = m.graph.index_of(*file.treatment);
  m.outcome = m.graph.index_of(*file.outcome);
  m.validate();
  return m;
}

LinearSem read_sem_file(const std::string& path) { return sem_from_file(read_edge_list_file(path)); }

std::string format_sem(const LinearSem& m) {
  std::ostringstream out;
  out << "treatment " << m.treatment_name() << '\n';
  out << "outcome " << m.outcome_name() << '\n';
  for (std::size_t v = 0; v < m.graph.size(); ++v) {
    out << "node " << m.graph.name(v) << '\n';
    if (m.link[v] == Link::logistic) out << "link " << m.graph.name(v) << " logistic\n";
    else out << "noise " << m.graph.name(v) << ' ' << format_double(m.noise_var[v]) << '\n';
    if (m.latent[v]) out << "latent " << m.graph.name(v) << '\n';
  }
  for (std::size_t v = 0; v < m.graph.size(); ++v) {
    const auto& pa = m.graph.parent_indices(v);
    for (std::size_t j = 0; j < pa.size(); ++j)
      out << m.graph.name(pa[j]) << " -> " << m.graph.name(v) << ' ' << format_double(m.coeff[v][j]) << '\n';
  }
  return out.str();
}

Dataset sample(const LinearSem& m, std::size_t n, std::uint64_t seed) { return draw(m, n, seed, -1, 0.0); }

Dataset sample_do(const LinearSem& m, const Intervention& iv, std::size_t n, std::uint64_t seed) {
  const std::size_t t = m.graph.index_of(iv.target);
  if (m.latent[t]) throw std::invalid_argument("cannot intervene on latent node " + iv.target);
  return draw(m, n, seed, static_cast<long>(t), iv.value);
}

double true_total_effect(const LinearSem& m, std::string_view x, std::string_view y) {
  const std::size_t ix = m.graph.index_of(x);
  const std::size_t iy = m.graph.index_of(y);
  if (ix == iy) throw std::invalid_argument("total effect needs distinct nodes");
  const auto desc = descendant_mask(m.graph, ix);
  if (!desc[iy]) return 0.0;
  const auto anc = ancestor_mask(m.graph, iy);
  std::vector<double> effect(m.graph.size(), 0.0);
  effect[ix] = 1.0;
  for (std::size_t v : m.graph.topological_order()) {
    if (!desc[v] || !(anc[v] || v == iy)) continue;
    if (m.link[v] != Link::linear)
      throw std::invalid_argument("total effect: node " + m.graph.name(v) +
                                  " on a directed path is not linear");
    const auto& pa = m.graph.parent_indices(v);
    double acc = 0.0;
    for (std::size_t j = 0; j < pa.size(); ++j) acc += m.coeff[v][j] * effect[pa[j]];
    effect[v] = acc;
  }
  return effect[iy];
}

LinearSem hide(const LinearSem& m, const NodeSet& hidden) {
  LinearSem out = m;
  for (const auto& name : hidden) {
    const std::size_t v = out.graph.index_of(name);
    if (v == out.treatment || v == out.outcome)
      throw std::invalid_argument("cannot hide the treatment or the outcome");
    out.latent[v] = 1;
  }
  return out;
}

Eigen::MatrixXd implied_covariance(const LinearSem& m) {
  m.validate();
  const auto n = static_cast<Eigen::Index>(m.graph.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd d(n);
  for (Eigen::Index v = 0; v < n; ++v) {
    if (m.link[static_cast<std::size_t>(v)] != Link::linear)
      throw std::invalid_argument("implied_covariance needs an all-linear model");
    const auto& pa = m.graph.parent_indices(static_cast<std::size_t>(v));
    for (std::size_t j = 0; j < pa.size(); ++j)
      b(v, static_cast<Eigen::Index>(pa[j])) = m.coeff[static_cast<std::size_t>(v)][j];
    d(v) = m.noise_var[static_cast<std::size_t>(v)];
  }
  // X = B X + e  =>  X = (I - B)^{-1} e
  const Eigen::MatrixXd a = (Eigen::MatrixXd::Identity(n, n) - b).inverse();
  return a * d.asDiagonal() * a.transpose();
}

LinearSem case_model(int id) {
  if (id < 1 || id > 3) throw std::invalid_argument("case id must be 1, 2 or 3");
  Builder b;
  b.nodes.push_back("X");
  for (int i = 1; i <= 100; ++i) b.nodes.push_back(z(i));
  b.nodes.push_back("Y");
  b.link["X"] = "logistic";

  if (id >= 2) {
    // Equicorrelation 0.5: Z_i = sqrt(0.5) F + N(0, 0.5).
    b.nodes.push_back("F");
    b.latent.push_back("F");
    for (int i = 1; i <= 100; ++i) {
      b.edge("F", z(i), std::sqrt(0.5));
      b.noise[z(i)] = 0.5;
    }
  }

  if (id <= 2) {
    for (int i = 1; i <= 10; ++i) b.edge(z(i), "X", 1.0);
    for (int i = 21; i <= 30; ++i) b.edge(z(i), "X", 1.0);
    b.edge("X", "Y", 0.5);
    for (int i = 1; i <= 20; ++i) b.edge(z(i), "Y", 0.6);
  } else {
    b.edge(z(1), "X", 0.5);
    b.edge(z(2), "X", -0.5);
    b.edge(z(5), "X", 0.3);
    b.edge(z(6), "X", -0.3);
    b.edge(z(7), "X", 0.35);
    b.edge(z(8), "X", 0.4);
    b.edge("X", "Y", 1.0);
    for (int i = 1; i <= 4; ++i) b.edge(z(i), "Y", 2.0);
  }
  return b.build("X", "Y");
}

std::pair<LinearSem, Dataset> make_case(int id, std::size_t n, std::uint64_t seed) {
  LinearSem m = case_model(id);
  Dataset d = sample(m, n, seed);
  return {std::move(m), std::move(d)};
}

double case_true_effect(int id) {
  if (id < 1 || id > 3) throw std::invalid_argument("case id must be 1, 2 or 3");
  return id == 3 ? 1.0 : 0.5;
}

LinearSem chain_model(bool hide_z2, double z3_noise) {
  Builder b;
  b.nodes = {"X", "Z1", "Z2", "Z3", "Y"};
  b.edge("Z1", "X", 1.0);
  b.edge("X", "Y", 1.0);
  b.edge("Z1", "Z2", 1.0);
  b.edge("Z2", "Z3", 1.0);
  b.edge("Z2", "Y", 1.0);
  b.noise["Z3"] = z3_noise;
  if (hide_z2) b.latent.push_back("Z2");
  return b.build("X", "Y");
}

}  // namespace cmio
