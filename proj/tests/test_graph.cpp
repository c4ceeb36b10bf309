#include <doctest.h>

#include <sstream>

#include "cmio/graph.hpp"
#include "cmio/graph_io.hpp"
#include "cmio/sem.hpp"
#include "oracles.hpp"

using cmio::Dag;
using cmio::NodeSet;

namespace {

Dag figure1() {
  return Dag({"X", "Z1", "Z2", "Z3", "Y"}, {{"Z1", "X"}, {"X", "Y"}, {"Z1", "Z2"}, {"Z2", "Z3"}, {"Z2", "Y"}});
}

std::vector<char> mask_from_bits(std::size_t n, std::size_t bits) {
  std::vector<char> m(n, 0);
  for (std::size_t i = 0; i < n; ++i) m[i] = (bits >> i) & 1U;
  return m;
}

}  // namespace

TEST_CASE("construction rejects cycles, self-loops, duplicates and unknown nodes") {
  CHECK_THROWS_AS(Dag({"A", "B"}, {{"A", "B"}, {"B", "A"}}), std::invalid_argument);
  CHECK_THROWS_AS(Dag({"A"}, {{"A", "A"}}), std::invalid_argument);
  CHECK_THROWS_AS(Dag({"A", "B"}, {{"A", "B"}, {"A", "B"}}), std::invalid_argument);
  CHECK_THROWS_AS(Dag({"A"}, {{"A", "C"}}), std::invalid_argument);
  CHECK_THROWS_AS(Dag({"A", "A"}, {}), std::invalid_argument);
  const Dag g({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}});
  const auto& topo = g.topological_order();
  REQUIRE(topo.size() == 3);
  CHECK(topo[0] == 0);
  CHECK(topo[2] == 2);
}

TEST_CASE("parents") {
  CHECK(cmio::parents(figure1(), "Y") == NodeSet{"X", "Z2"});
  CHECK(cmio::parents(Dag({"v"}, {}), "v").empty());
  CHECK(cmio::parents(Dag({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}), "C") == NodeSet{"B"});
  CHECK_THROWS_AS(cmio::parents(figure1(), "nope"), std::invalid_argument);
}

TEST_CASE("descendants and ancestors") {
  CHECK(cmio::descendants(figure1(), "Z1") == NodeSet{"X", "Z2", "Z3", "Y"});
  CHECK(cmio::ancestors(figure1(), "Y") == NodeSet{"X", "Z1", "Z2"});
  CHECK(cmio::descendants(Dag({"a", "b"}, {}), "a").empty());
  CHECK_THROWS_AS(cmio::descendants(figure1(), "W"), std::invalid_argument);

  cmio::Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const Dag g = oracle::random_dag(rng, 2 + rng.below(7), 0.35);
    for (std::size_t v = 0; v < g.size(); ++v) {
      CHECK(cmio::descendant_mask(g, v) == oracle::dfs_descendants(g, v));
      for (std::size_t u = 0; u < g.size(); ++u)
        CHECK(static_cast<bool>(cmio::ancestor_mask(g, v)[u]) == static_cast<bool>(oracle::dfs_descendants(g, u)[v]));
    }
  }
}

TEST_CASE("d-separation on the five-node example") {
  const Dag g = figure1();
  CHECK(cmio::d_separated(g, "Z1", "Y", {"X", "Z2", "Z3"}));
  CHECK_FALSE(cmio::d_separated(g, "Z3", "Y", {"X", "Z1"}));
  CHECK(cmio::d_separated(Dag({"a", "b"}, {}), "a", "b", {}));
  // Collider opened by conditioning on a descendant.
  const Dag c({"A", "B", "C", "D"}, {{"A", "C"}, {"B", "C"}, {"C", "D"}});
  CHECK(cmio::d_separated(c, "A", "B", {}));
  CHECK_FALSE(cmio::d_separated(c, "A", "B", {"D"}));
  CHECK_THROWS_AS(cmio::d_separated(g, "X", "X", {}), std::invalid_argument);
  CHECK_THROWS_AS(cmio::d_separated(g, "X", "Y", {"X"}), std::invalid_argument);
  CHECK_THROWS_AS(cmio::d_separated(g, "X", "Q", {}), std::invalid_argument);
}

TEST_CASE("d-separation matches path enumeration and is symmetric") {
  cmio::Rng rng(2024);
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const Dag g = oracle::random_dag(rng, 3 + rng.below(4), 0.4);
    const std::size_t n = g.size();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
          if ((bits >> a) & 1U || (bits >> b) & 1U) continue;
          const auto m = mask_from_bits(n, bits);
          const bool fast = cmio::d_separated(g, a, b, m);
          mismatches += fast != oracle::path_d_separated(g, a, b, m);
          mismatches += fast != cmio::d_separated(g, b, a, m);
        }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("predictors of Y") {
  const Dag g = figure1();
  CHECK(cmio::predictors_of(g, "Y", "X", {"Z1", "Z2", "Z3"}) == NodeSet{"Z2"});
  CHECK(cmio::predictors_of(g, "Y", "X", {"Z2", "Z3"}) == NodeSet{"Z2"});
  CHECK(cmio::predictors_of(g, "Y", "X", {"Z1", "Z3"}) == NodeSet{"Z1", "Z3"});
  CHECK(cmio::predictors_of(g, "Y", "X", {}).empty());
}

TEST_CASE("d-adjacency") {
  const Dag g = figure1();
  const NodeSet z{"X", "Z1", "Z3", "Y"};
  CHECK(cmio::d_adjacent(g, "Z1", "Y", z));
  CHECK(cmio::d_adjacent(g, "Z3", "Y", z));
  CHECK(cmio::d_adjacent(g, "X", "Y", {"Z1", "Z2", "Z3"}));
  CHECK_FALSE(cmio::d_adjacent(g, "Z1", "Y", {"X", "Z2"}));
}

TEST_CASE("predictors are exactly the covariates d-adjacent to Y given X and the rest") {
  cmio::Rng rng(77);
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 80; ++rep) {
    const Dag g = oracle::random_dag(rng, 3 + rng.below(6), 0.4);
    const std::size_t n = g.size();
    const std::string x = g.name(0), y = g.name(n - 1);
    std::vector<std::string> others;
    for (std::size_t v = 1; v + 1 < n; ++v) others.push_back(g.name(v));
    for (std::size_t bits = 0; bits < (std::size_t{1} << others.size()); ++bits) {
      NodeSet z;
      for (std::size_t i = 0; i < others.size(); ++i)
        if ((bits >> i) & 1U) z.insert(others[i]);
      NodeSet xz = z;
      xz.insert(x);
      NodeSet adj;
      for (const auto& w : z)
        if (cmio::d_adjacent(g, w, y, xz)) adj.insert(w);
      mismatches += adj != cmio::predictors_of(g, y, x, z);
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("valid adjustment sets") {
  const Dag g = figure1();
  CHECK(cmio::is_valid_adjustment(g, "X", "Y", {"Z1"}));
  CHECK_FALSE(cmio::is_valid_adjustment(g, "X", "Y", {"Z3"}));
  CHECK(cmio::is_valid_adjustment(g, "X", "Y", {"Z1", "Z3"}));
  CHECK(cmio::is_valid_adjustment(g, "X", "Y", {"Z2"}));
  CHECK_FALSE(cmio::is_valid_adjustment(g, "X", "Y", {}));
  CHECK(cmio::is_valid_adjustment(Dag({"X", "Y"}, {{"X", "Y"}}), "X", "Y", {}));
  // A descendant of the treatment is never allowed.
  const Dag m({"X", "M", "Y"}, {{"X", "M"}, {"M", "Y"}});
  CHECK_FALSE(cmio::is_valid_adjustment(m, "X", "Y", {"M"}));
}

TEST_CASE("optimal adjustment set") {
  CHECK(cmio::optimal_adjustment(figure1(), "X", "Y") == NodeSet{"Z2"});
  CHECK(cmio::optimal_adjustment(Dag({"X", "Y"}, {{"X", "Y"}}), "X", "Y").empty());
  NodeSet expected;
  for (int i = 1; i <= 20; ++i) expected.insert("Z" + std::to_string(i));
  const auto m = cmio::case_model(1);
  CHECK(cmio::optimal_adjustment(m.graph, "X", "Y") == expected);
  const Dag med({"X", "M", "Y"}, {{"X", "M"}, {"M", "Y"}});
  CHECK_THROWS_AS(cmio::optimal_adjustment(med, "X", "Y"), std::invalid_argument);

  // Whenever no covariate descends from X or Y the parent set is valid.
  cmio::Rng rng(5);
  int checked = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const Dag g = oracle::random_dag(rng, 3 + rng.below(6), 0.45);
    const std::size_t n = g.size();
    const auto topo = g.topological_order();
    const std::string x = g.name(topo[n - 2]), y = g.name(topo[n - 1]);
    if (!cmio::descendants(g, x).empty() && cmio::descendants(g, x) != NodeSet{y}) continue;
    const auto o = cmio::optimal_adjustment(g, x, y);
    CHECK(cmio::is_valid_adjustment(g, x, y, o));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("edge-list parsing") {
  std::istringstream in(
      "# comment\n"
      "treatment X\noutcome Y\n"
      "A -> X 0.5   # trailing comment\n"
      "X -> Y\n"
      "noise A 2\nlink X logistic\nlatent A\n");
  const auto f = cmio::parse_edge_list(in);
  REQUIRE(f.nodes == std::vector<std::string>{"A", "X", "Y"});
  REQUIRE(f.edges.size() == 2);
  CHECK(f.edges[0].weight.value() == 0.5);
  CHECK_FALSE(f.edges[1].weight.has_value());
  CHECK(f.treatment.value() == "X");
  CHECK(f.latent == std::vector<std::string>{"A"});
  CHECK(f.to_dag().has_edge(0, 1));

  std::istringstream bad("A -> \n");
  CHECK_THROWS_AS(cmio::parse_edge_list(bad), std::invalid_argument);
  std::istringstream cyc("A -> B\nB -> A\n");
  CHECK_THROWS_AS(cmio::parse_edge_list(cyc).to_dag(), std::invalid_argument);
  CHECK_THROWS_AS(cmio::read_edge_list_file("/nonexistent/graph.txt"), std::invalid_argument);
  CHECK(cmio::read_edge_list_file(CMIO_TEST_DATA "/figure1.txt").to_dag().size() == 5);
}
