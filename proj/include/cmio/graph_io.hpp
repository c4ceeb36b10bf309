#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmio/graph.hpp"

namespace cmio {

/// Parsed contents of an edge-list / model file.
///
/// Body lines are `parent -> child [weight]`. Optional header directives
/// (one per line, anywhere before or between edges):
///
///     node <name>                  declare a node (fixes column order, allows isolated nodes)
///     noise <name> <variance>      Gaussian noise variance of a linear node
///     link <name> linear|logistic  structural link of a node
///     latent <name> [<name> ...]   generated but hidden from datasets
///     treatment <name>
///     outcome <name>
///
/// `#` starts a comment. Node order is order of first mention.
struct EdgeListFile {
  struct WeightedEdge {
    std::string parent;
    std::string child;
    std::optional<double> weight;
  };
  std::vector<std::string> nodes;
  std::vector<WeightedEdge> edges;
  std::map<std::string, double> noise;
  std::map<std::string, std::string> link;
  std::vector<std::string> latent;
  std::optional<std::string> treatment;
  std::optional<std::string> outcome;

  Dag to_dag() const;
};

/// Throws std::invalid_argument with the offending line number on bad input.
EdgeListFile parse_edge_list(std::istream& in);
EdgeListFile read_edge_list_file(const std::string& path);

}  // namespace cmio
