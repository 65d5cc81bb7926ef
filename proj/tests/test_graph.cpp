#include <gtest/gtest.h>

#include <bit>

#include "tsre/errors.hpp"
#include "tsre/graph.hpp"

using namespace tsre;

namespace {

/// Size of the cycle space by brute force: count edge subsets in which every
/// vertex has even degree. The space has 2^L elements.
int cycle_space_dimension(int n, const std::vector<Edge>& edges) {
  const std::size_t m = edges.size();
  int count = 0;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> degree(static_cast<std::size_t>(n + 1), 0);
    for (std::size_t e = 0; e < m; ++e)
      if (mask >> e & 1u) {
        ++degree[edges[e].first];
        ++degree[edges[e].second];
      }
    bool even = true;
    for (int d : degree) even = even && d % 2 == 0;
    count += even;
  }
  return std::countr_zero(static_cast<unsigned>(count));
}

}  // namespace

TEST(Graph, ChainEdges) {
  const auto g = build_chain(4, 1.0, 0.5);
  ASSERT_EQ(g.edge_count(), 3);
  EXPECT_EQ(g.edge(0).first, 1);
  EXPECT_EQ(g.edge(0).second, 2);
  EXPECT_EQ(g.edge(2).first, 3);
  EXPECT_EQ(g.edge(2).second, 4);
  EXPECT_TRUE(g.is_chain());
  EXPECT_DOUBLE_EQ(g.lambda(4), 0.5);
}

TEST(Graph, ChainOfTwoHasOneEdge) {
  const auto g = build_chain(2, 1.0, 1.0);
  EXPECT_EQ(g.edge_count(), 1);
}

TEST(Graph, ChainOfOneIsRejected) { EXPECT_THROW(build_chain(1, 1.0, 1.0), InvalidSizeError); }

TEST(Graph, RingEdges) {
  const auto g = build_ring(3, 1.0, 1.0);
  ASSERT_EQ(g.edge_count(), 3);
  EXPECT_EQ(g.edge(2).first, 3);
  EXPECT_EQ(g.edge(2).second, 1);
  EXPECT_TRUE(g.is_ring());
  const auto six = build_ring(6, 1.0, 1.0);
  EXPECT_EQ(six.edge_count(), 6);
  EXPECT_EQ(cycle_rank(six), 1);
}

TEST(Graph, RingOfTwoIsRejected) { EXPECT_THROW(build_ring(2, 1.0, 1.0), InvalidSizeError); }

TEST(Graph, ConstructionValidates) {
  EXPECT_THROW(InteractionGraph(3, {{1, 1}, {1, 2}, {2, 3}}, {1, 1, 1}, {1, 1, 1}), TopologyError);
  EXPECT_THROW(InteractionGraph(3, {{1, 2}, {2, 1}, {2, 3}}, {1, 1, 1}, {1, 1, 1}), TopologyError);
  EXPECT_THROW(InteractionGraph(3, {{1, 2}, {2, 4}}, {1, 1}, {1, 1, 1}), TopologyError);
  EXPECT_THROW(InteractionGraph(4, {{1, 2}, {3, 4}}, {1, 1}, {1, 1, 1, 1}), TopologyError);
  EXPECT_THROW(InteractionGraph(2, {{1, 2}}, {-1.0}, {1, 1}), ConfigError);
  EXPECT_THROW(InteractionGraph(2, {{1, 2}}, {1.0}, {1}), ConfigError);
}

TEST(Graph, CycleRankOfChainAndRing) {
  EXPECT_EQ(cycle_rank(build_chain(10, 1, 1)), 0);
  EXPECT_EQ(cycle_rank(build_ring(10, 1, 1)), 1);
}

TEST(Graph, CycleRankOfCompleteGraphMatchesCycleSpace) {
  const std::vector<Edge> k4 = {{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}};
  const InteractionGraph g(4, k4, std::vector<double>(6, 1.0), std::vector<double>(4, 1.0));
  EXPECT_EQ(cycle_rank(g), 3);
  EXPECT_EQ(cycle_space_dimension(4, k4), 3);
}

TEST(Graph, CycleRankMatchesCycleSpaceOnSmallGraphs) {
  // Square with a diagonal, two triangles sharing a vertex, a path.
  const std::vector<std::pair<int, std::vector<Edge>>> cases = {
      {4, {{1, 2}, {2, 3}, {3, 4}, {4, 1}, {1, 3}}},
      {5, {{1, 2}, {2, 3}, {3, 1}, {3, 4}, {4, 5}, {5, 3}}},
      {5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}}},
  };
  for (const auto& [n, edges] : cases) EXPECT_EQ(cycle_rank(n, edges), cycle_space_dimension(n, edges));
}

TEST(Graph, DisconnectedEdgeSetHasNoCycleRank) {
  const std::vector<Edge> edges = {{1, 2}, {3, 4}};
  EXPECT_THROW(cycle_rank(4, edges), TopologyError);
}

TEST(Graph, ParameterCounts) {
  for (int n = 2; n <= 12; ++n) {
    const int m = n - 1;
    EXPECT_EQ(parameter_count(build_chain(n, 1, 1)), 6 * m - 3 + 3 * n);
  }
  for (int n = 3; n <= 12; ++n) EXPECT_EQ(parameter_count(build_ring(n, 1, 1)), 6 * n + 3 * n);
  EXPECT_EQ(parameter_count(build_chain(2, 1, 1)), 9);
}

// For a connected graph L = M - N + 1, so 6M + 3N + 3L - 3 collapses to 9M:
// raw count 9M + 3N minus the 3N gauge directions. Adding 3L on top of that
// would double count the cycles.
TEST(Graph, RawCountMinusGauge) {
  for (int n = 3; n <= 9; ++n) {
    for (const auto& g : {build_chain(n, 1, 1), build_ring(n, 1, 1)}) {
      const int m = g.edge_count();
      EXPECT_EQ(parameter_count(g), (9 * m + 3 * n) - 3 * n);
      EXPECT_EQ(parameter_count(g), 6 * m + 3 * n + 3 * cycle_rank(g) - 3);
    }
  }
}

TEST(Graph, ClosingAChainGivesTheRingReport) {
  for (int n = 3; n <= 8; ++n) {
    const auto chain = build_chain(n, 1, 1);
    auto edges = chain.edges();
    edges.push_back({n, 1});
    const InteractionGraph closed(n, edges, std::vector<double>(edges.size(), 1.0),
                                  std::vector<double>(static_cast<std::size_t>(n), 1.0));
    const auto a = topology(closed);
    const auto b = topology(build_ring(n, 1, 1));
    EXPECT_EQ(a.n_edges, b.n_edges);
    EXPECT_EQ(a.cycle_rank, b.cycle_rank);
    EXPECT_EQ(a.parameter_count, b.parameter_count);
  }
}

TEST(Graph, CycleRankAddsOverBlocks) {
  // Two triangles joined by a bridge: blocks contribute 1 + 1 + 0.
  const std::vector<Edge> edges = {{1, 2}, {2, 3}, {3, 1}, {3, 4}, {4, 5}, {5, 6}, {6, 4}};
  EXPECT_EQ(cycle_rank(6, edges), 2);
}

TEST(Graph, WithLambdaKeepsTopology) {
  const auto g = build_ring(5, 2.0, 1.0).with_lambda(0.0);
  EXPECT_TRUE(g.is_ring());
  EXPECT_DOUBLE_EQ(g.mu(0), 2.0);
  EXPECT_DOUBLE_EQ(g.lambda(3), 0.0);
}
