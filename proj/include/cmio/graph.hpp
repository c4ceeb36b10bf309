#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cmio {

/// Set of variable names. Iteration order is lexicographic, which is what
/// every report and comparison in the library relies on.
using NodeSet = std::set<std::string>;

using Edge = std::pair<std::string, std::string>;

/// Immutable directed acyclic graph over named variables.
///
/// Node order is the order given at construction; it is also the order the
/// samplers and datasets use for columns. Construction rejects cycles,
/// self-loops, duplicate edges and edges that mention undeclared nodes.
/// All query methods are const and safe to call concurrently.
class Dag {
 public:
  Dag() = default;
  Dag(std::vector<std::string> nodes, const std::vector<Edge>& edges);

  std::size_t size() const { return names_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::vector<std::string>& nodes() const { return names_; }
  const std::string& name(std::size_t v) const { return names_.at(v); }

  bool contains(std::string_view name) const;
  /// Throws std::invalid_argument for unknown names.
  std::size_t index_of(std::string_view name) const;

  const std::vector<std::size_t>& parent_indices(std::size_t v) const { return parents_[v]; }
  const std::vector<std::size_t>& child_indices(std::size_t v) const { return children_[v]; }
  bool has_edge(std::size_t from, std::size_t to) const;

  /// Edges as (parent, child) name pairs, grouped by child in node order.
  std::vector<Edge> edges() const;

  /// A topological order (ties broken by construction order).
  const std::vector<std::size_t>& topological_order() const { return topo_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> topo_;
  std::size_t edge_count_ = 0;
};

NodeSet parents(const Dag& g, std::string_view v);
NodeSet children(const Dag& g, std::string_view v);
/// Strict descendants: v itself is never included.
NodeSet descendants(const Dag& g, std::string_view v);
/// Strict ancestors: v itself is never included.
NodeSet ancestors(const Dag& g, std::string_view v);

// Index-level variants used by the hot paths. Results are boolean masks
// over node indices.
std::vector<char> descendant_mask(const Dag& g, std::size_t v);
std::vector<char> ancestor_mask(const Dag& g, std::size_t v);

/// Reachability ("Bayes ball") d-separation test. `cond` must not contain
/// a or b. Runs in O(|V| + |E|).
bool d_separated(const Dag& g, std::string_view a, std::string_view b, const NodeSet& cond);
bool d_separated(const Dag& g, std::size_t a, std::size_t b, const std::vector<char>& cond_mask);

/// True iff some path between u and v is left open by z \ {u, v}.
/// Callers that want the treatment in the blocking set pass it inside z.
bool d_adjacent(const Dag& g, std::string_view u, std::string_view v, const NodeSet& z);

/// Members W of z that stay d-connected to y given ({x} u z) \ {W}.
NodeSet predictors_of(const Dag& g, std::string_view y, std::string_view x, const NodeSet& z);

/// Back-door test: z has no descendant of x, and z d-separates x from y
/// once the edges leaving x are removed.
bool is_valid_adjustment(const Dag& g, std::string_view x, std::string_view y, const NodeSet& z);

/// PA(y) \ {x}. Throws std::invalid_argument when some node other than x
/// and y descends from x or from y, since the parent set is then not the
/// minimum-variance valid set.
NodeSet optimal_adjustment(const Dag& g, std::string_view x, std::string_view y);

}  // namespace cmio
