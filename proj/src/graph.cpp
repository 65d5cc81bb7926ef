#include "tsre/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include "tsre/errors.hpp"

namespace tsre {

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::chain: return "chain";
    case GraphKind::ring: return "ring";
    case GraphKind::custom: return "custom";
  }
  return "custom";
}

GraphKind graph_kind_from_string(const std::string& name) {
  if (name == "chain") return GraphKind::chain;
  if (name == "ring") return GraphKind::ring;
  if (name == "custom") return GraphKind::custom;
  throw ConfigError("unknown graph type '" + name + "'");
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

int cycle_rank(int n, std::span<const Edge> edges) {
  if (n < 1) throw InvalidSizeError("graph needs at least one vertex");
  DisjointSets sets(n);
  int components = n;
  for (const Edge& e : edges) {
    if (e.first < 1 || e.first > n || e.second < 1 || e.second > n)
      throw TopologyError("edge endpoint outside [1, N]");
    if (sets.unite(e.first - 1, e.second - 1)) --components;
  }
  if (components != 1)
    throw TopologyError("graph is disconnected (" + std::to_string(components) + " components)");
  return static_cast<int>(edges.size()) - n + 1;
}

InteractionGraph::InteractionGraph(int vertex_count, std::vector<Edge> edges,
                                   std::vector<double> mu, std::vector<double> lambda,
                                   GraphKind kind)
    : n_(vertex_count),
      edges_(std::move(edges)),
      mu_(std::move(mu)),
      lambda_(std::move(lambda)),
      kind_(kind) {
  if (n_ < 1) throw InvalidSizeError("graph needs at least one vertex");
  if (mu_.size() != edges_.size())
    throw ConfigError("mu must have one entry per edge");
  if (lambda_.size() != static_cast<std::size_t>(n_))
    throw ConfigError("lambda must have one entry per vertex");
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    if (e.first < 1 || e.first > n_ || e.second < 1 || e.second > n_)
      throw TopologyError("edge endpoint outside [1, N]");
    if (e.first == e.second) throw TopologyError("self-loop on vertex " + std::to_string(e.first));
    auto key = std::minmax(e.first, e.second);
    if (!seen.insert({key.first, key.second}).second)
      throw TopologyError("duplicate edge (" + std::to_string(key.first) + "," +
                          std::to_string(key.second) + ")");
  }
  for (double m : mu_)
    if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("mu must be finite and non-negative");
  for (double l : lambda_)
    if (!(l >= 0.0) || !std::isfinite(l))
      throw ConfigError("lambda must be finite and non-negative");
  cycle_rank(n_, edges_);
}

int InteractionGraph::find_edge(int a, int b) const {
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    if ((ed.first == a && ed.second == b) || (ed.first == b && ed.second == a))
      return static_cast<int>(e);
  }
  return -1;
}

bool InteractionGraph::is_chain() const {
  if (edge_count() != n_ - 1 || n_ < 2) return false;
  for (int j = 1; j < n_; ++j)
    if (edges_[j - 1] != Edge{j, j + 1}) return false;
  return true;
}

bool InteractionGraph::is_ring() const {
  if (edge_count() != n_ || n_ < 3) return false;
  for (int j = 1; j < n_; ++j)
    if (edges_[j - 1] != Edge{j, j + 1}) return false;
  return edges_.back() == Edge{n_, 1};
}

InteractionGraph InteractionGraph::with_lambda(double lambda) const {
  return InteractionGraph(n_, edges_, mu_, std::vector<double>(lambda_.size(), lambda), kind_);
}

InteractionGraph build_chain(int n, double mu, double lambda) {
  if (n < 2) throw InvalidSizeError("chain needs N >= 2, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (int j = 1; j < n; ++j) edges.push_back({j, j + 1});
  return InteractionGraph(n, std::move(edges), std::vector<double>(n - 1, mu),
                          std::vector<double>(n, lambda), GraphKind::chain);
}

InteractionGraph build_ring(int n, double mu, double lambda) {
  if (n < 3) throw InvalidSizeError("ring needs N >= 3, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (int j = 1; j < n; ++j) edges.push_back({j, j + 1});
  edges.push_back({n, 1});
  return InteractionGraph(n, std::move(edges), std::vector<double>(n, mu),
                          std::vector<double>(n, lambda), GraphKind::ring);
}

int cycle_rank(const InteractionGraph& g) { return cycle_rank(g.vertex_count(), g.edges()); }

int parameter_count(const InteractionGraph& g) {
  const int m = g.edge_count();
  const int n = g.vertex_count();
  return 6 * m + 3 * n + 3 * cycle_rank(g) - 3;
}

TopologyReport topology(const InteractionGraph& g) {
  return {g.vertex_count(), g.edge_count(), cycle_rank(g), parameter_count(g)};
}

}  // namespace tsre
