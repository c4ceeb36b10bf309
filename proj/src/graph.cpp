#include "cmio/graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

namespace cmio {

namespace {

constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

NodeSet names_of(const Dag& g, const std::vector<char>& mask) {
  NodeSet out;
  for (std::size_t v = 0; v < mask.size(); ++v)
    if (mask[v]) out.insert(g.name(v));
  return out;
}

std::vector<char> mask_of(const Dag& g, const NodeSet& set) {
  std::vector<char> mask(g.size(), 0);
  for (const auto& s : set) mask[g.index_of(s)] = 1;
  return mask;
}

// Directed reachability from v; follows children (down) or parents (up).
std::vector<char> closure(const Dag& g, std::size_t v, bool down) {
  std::vector<char> seen(g.size(), 0);
  std::vector<std::size_t> stack{v};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    const auto& next = down ? g.child_indices(u) : g.parent_indices(u);
    for (std::size_t w : next) {
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

// Bayes-ball reachability. `cut` removes every edge leaving that node, which
// is how the back-door graph is formed without copying the Dag.
bool d_connected(const Dag& g, std::size_t a, std::size_t b, const std::vector<char>& cond,
                 std::size_t cut) {
  const std::size_t n = g.size();
  auto edge_live = [cut](std::size_t from) { return from != cut; };

  // Nodes that are in cond or have a descendant in cond; colliders there open up.
  std::vector<char> anc_of_cond(n, 0);
  {
    std::vector<std::size_t> stack;
    for (std::size_t v = 0; v < n; ++v) {
      if (cond[v]) {
        anc_of_cond[v] = 1;
        stack.push_back(v);
      }
    }
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t p : g.parent_indices(u)) {
        if (!edge_live(p) || anc_of_cond[p]) continue;
        anc_of_cond[p] = 1;
        stack.push_back(p);
      }
    }
  }

  // visited[2*v]   : reached v travelling up (from a child)
  // visited[2*v+1] : reached v travelling down (from a parent)
  std::vector<char> visited(2 * n, 0);
  std::deque<std::pair<std::size_t, bool>> queue;
  queue.emplace_back(a, true);
  while (!queue.empty()) {
    const auto [v, up] = queue.front();
    queue.pop_front();
    const std::size_t slot = 2 * v + (up ? 0 : 1);
    if (visited[slot]) continue;
    visited[slot] = 1;
    if (v == b) return true;

    if (up) {
      if (cond[v]) continue;
      for (std::size_t p : g.parent_indices(v))
        if (edge_live(p)) queue.emplace_back(p, true);
      if (edge_live(v))
        for (std::size_t c : g.child_indices(v)) queue.emplace_back(c, false);
    } else {
      if (!cond[v]) {
        if (edge_live(v))
          for (std::size_t c : g.child_indices(v)) queue.emplace_back(c, false);
      }
      if (anc_of_cond[v]) {
        for (std::size_t p : g.parent_indices(v))
          if (edge_live(p)) queue.emplace_back(p, true);
      }
    }
  }
  return false;
}

void check_pair(const Dag& g, std::size_t a, std::size_t b, const std::vector<char>& cond) {
  if (a == b) throw std::invalid_argument("d-separation query needs two distinct nodes: " + g.name(a));
  if (cond[a] || cond[b])
    throw std::invalid_argument("d-separation query endpoints must not be in the conditioning set");
}

}  // namespace

Dag::Dag(std::vector<std::string> nodes, const std::vector<Edge>& edges) : names_(std::move(nodes)) {
  const std::size_t n = names_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (names_[i].empty()) throw std::invalid_argument("empty node name");
    if (!index_.emplace(names_[i], i).second)
      throw std::invalid_argument("duplicate node: " + names_[i]);
  }
  parents_.assign(n, {});
  children_.assign(n, {});
  for (const auto& [from, to] : edges) {
    const std::size_t u = index_of(from);
    const std::size_t v = index_of(to);
    if (u == v) throw std::invalid_argument("self-loop on " + from);
    if (std::find(children_[u].begin(), children_[u].end(), v) != children_[u].end())
      throw std::invalid_argument("duplicate edge " + from + " -> " + to);
    children_[u].push_back(v);
    parents_[v].push_back(u);
    ++edge_count_;
  }

  // Kahn's algorithm, always taking the lowest-index ready node.
  std::vector<std::size_t> indegree(n);
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    indegree[v] = parents_[v].size();
    if (indegree[v] == 0) ready.insert(v);
  }
  topo_.reserve(n);
  while (!ready.empty()) {
    const std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    topo_.push_back(v);
    for (std::size_t c : children_[v])
      if (--indegree[c] == 0) ready.insert(c);
  }
  if (topo_.size() != n) throw std::invalid_argument("graph contains a directed cycle");
}

bool Dag::contains(std::string_view name) const { return index_.count(std::string(name)) > 0; }

std::size_t Dag::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::invalid_argument("unknown node: " + std::string(name));
  return it->second;
}

bool Dag::has_edge(std::size_t from, std::size_t to) const {
  const auto& c = children_.at(from);
  return std::find(c.begin(), c.end(), to) != c.end();
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::size_t v = 0; v < size(); ++v)
    for (std::size_t p : parents_[v]) out.emplace_back(names_[p], names_[v]);
  return out;
}

NodeSet parents(const Dag& g, std::string_view v) {
  NodeSet out;
  for (std::size_t p : g.parent_indices(g.index_of(v))) out.insert(g.name(p));
  return out;
}

NodeSet children(const Dag& g, std::string_view v) {
  NodeSet out;
  for (std::size_t c : g.child_indices(g.index_of(v))) out.insert(g.name(c));
  return out;
}

std::vector<char> descendant_mask(const Dag& g, std::size_t v) { return closure(g, v, true); }
std::vector<char> ancestor_mask(const Dag& g, std::size_t v) { return closure(g, v, false); }

NodeSet descendants(const Dag& g, std::string_view v) {
  return names_of(g, descendant_mask(g, g.index_of(v)));
}

NodeSet ancestors(const Dag& g, std::string_view v) {
  return names_of(g, ancestor_mask(g, g.index_of(v)));
}

bool d_separated(const Dag& g, std::size_t a, std::size_t b, const std::vector<char>& cond_mask) {
  check_pair(g, a, b, cond_mask);
  return !d_connected(g, a, b, cond_mask, kNoNode);
}

bool d_separated(const Dag& g, std::string_view a, std::string_view b, const NodeSet& cond) {
  return d_separated(g, g.index_of(a), g.index_of(b), mask_of(g, cond));
}

bool d_adjacent(const Dag& g, std::string_view u, std::string_view v, const NodeSet& z) {
  const std::size_t iu = g.index_of(u);
  const std::size_t iv = g.index_of(v);
  if (iu == iv) throw std::invalid_argument("d_adjacent needs two distinct nodes");
  auto mask = mask_of(g, z);
  mask[iu] = 0;
  mask[iv] = 0;
  return d_connected(g, iu, iv, mask, kNoNode);
}

NodeSet predictors_of(const Dag& g, std::string_view y, std::string_view x, const NodeSet& z) {
  const std::size_t iy = g.index_of(y);
  const std::size_t ix = g.index_of(x);
  if (z.count(std::string(y)) || z.count(std::string(x)))
    throw std::invalid_argument("predictors_of: treatment and outcome must not be in z");
  auto mask = mask_of(g, z);
  mask[ix] = 1;
  NodeSet out;
  for (const auto& w : z) {
    const std::size_t iw = g.index_of(w);
    mask[iw] = 0;
    if (d_connected(g, iw, iy, mask, kNoNode)) out.insert(w);
    mask[iw] = 1;
  }
  return out;
}

bool is_valid_adjustment(const Dag& g, std::string_view x, std::string_view y, const NodeSet& z) {
  const std::size_t ix = g.index_of(x);
  const std::size_t iy = g.index_of(y);
  if (ix == iy) throw std::invalid_argument("treatment and outcome must differ");
  const auto mask = mask_of(g, z);
  if (mask[ix] || mask[iy])
    throw std::invalid_argument("adjustment set must not contain treatment or outcome");
  const auto desc = descendant_mask(g, ix);
  for (std::size_t v = 0; v < g.size(); ++v)
    if (mask[v] && desc[v]) return false;
  return !d_connected(g, ix, iy, mask, ix);
}

NodeSet optimal_adjustment(const Dag& g, std::string_view x, std::string_view y) {
  const std::size_t ix = g.index_of(x);
  const std::size_t iy = g.index_of(y);
  if (ix == iy) throw std::invalid_argument("treatment and outcome must differ");
  const auto dx = descendant_mask(g, ix);
  const auto dy = descendant_mask(g, iy);
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (v == ix || v == iy) continue;
    if (dx[v] || dy[v])
      throw std::invalid_argument("optimal_adjustment: covariate " + g.name(v) +
                                  " descends from the treatment or the outcome");
  }
  NodeSet out;
  for (std::size_t p : g.parent_indices(iy))
    if (p != ix) out.insert(g.name(p));
  return out;
}

}  // namespace cmio
