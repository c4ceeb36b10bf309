#include "cmio/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace cmio {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

Dag EdgeListFile::to_dag() const {
  std::vector<Edge> plain;
  plain.reserve(edges.size());
  for (const auto& e : edges) plain.emplace_back(e.parent, e.child);
  return Dag(nodes, plain);
}

EdgeListFile parse_edge_list(std::istream& in) {
  EdgeListFile out;
  std::unordered_set<std::string> seen;
  auto mention = [&](const std::string& name) {
    if (seen.insert(name).second) out.nodes.push_back(name);
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    auto tok = tokenize(raw);
    if (tok.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + why);
    };

    if (tok.size() >= 3 && tok[1] == "->") {
      if (tok.size() > 4) fail("trailing tokens after edge weight");
      EdgeListFile::WeightedEdge e{tok[0], tok[2], std::nullopt};
      if (tok.size() == 4) e.weight = parse_number(tok[3], line_no);
      mention(e.parent);
      mention(e.child);
      out.edges.push_back(std::move(e));
      continue;
    }

    const std::string& key = tok[0];
    if (key == "node") {
      if (tok.size() < 2) fail("node needs a name");
      for (std::size_t i = 1; i < tok.size(); ++i) mention(tok[i]);
    } else if (key == "noise") {
      if (tok.size() != 3) fail("expected: noise <name> <variance>");
      mention(tok[1]);
      out.noise[tok[1]] = parse_number(tok[2], line_no);
    } else if (key == "link") {
      if (tok.size() != 3 || (tok[2] != "linear" && tok[2] != "logistic"))
        fail("expected: link <name> linear|logistic");
      mention(tok[1]);
      out.link[tok[1]] = tok[2];
    } else if (key == "latent") {
      if (tok.size() < 2) fail("latent needs at least one name");
      for (std::size_t i = 1; i < tok.size(); ++i) {
        mention(tok[i]);
        out.latent.push_back(tok[i]);
      }
    } else if (key == "treatment" || key == "outcome") {
      if (tok.size() != 2) fail("expected: " + key + " <name>");
      (key == "treatment" ? out.treatment : out.outcome) = tok[1];
    } else {
      fail("unrecognised line '" + raw + "'");
    }
  }
  return out;
}

EdgeListFile read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return parse_edge_list(in);
}

}  // namespace cmio
