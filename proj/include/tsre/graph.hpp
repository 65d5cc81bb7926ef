#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tsre {

/// Oriented edge between 1-based vertices. The orientation fixes which spin
/// sits on the left of the bond matrix: sigma_first . A sigma_second.
struct Edge {
  int first = 0;
  int second = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class GraphKind { chain, ring, custom };

std::string to_string(GraphKind kind);
GraphKind graph_kind_from_string(const std::string& name);

/// Connected interaction graph with non-negative bond and field strengths.
/// Immutable once built.
class InteractionGraph {
 public:
  /// Validates the vertex range, rejects self-loops, duplicate (unordered)
  /// edges and disconnected graphs.
  InteractionGraph(int vertex_count, std::vector<Edge> edges, std::vector<double> mu,
                   std::vector<double> lambda, GraphKind kind = GraphKind::custom);

  int vertex_count() const noexcept { return n_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  GraphKind kind() const noexcept { return kind_; }

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  /// Bond strength of edge index e.
  double mu(std::size_t e) const { return mu_.at(e); }
  /// Field strength of 1-based vertex v.
  double lambda(int v) const { return lambda_.at(static_cast<std::size_t>(v - 1)); }
  const std::vector<double>& mu_values() const noexcept { return mu_; }
  const std::vector<double>& lambda_values() const noexcept { return lambda_; }

  /// Edge index of {a, b} irrespective of orientation, or -1.
  int find_edge(int a, int b) const;

  /// Edges are exactly (j, j+1) for j = 1..N-1, in that order.
  bool is_chain() const;
  /// Chain edges followed by the closing edge (N, 1).
  bool is_ring() const;

  /// Same topology and strengths with every field strength replaced.
  InteractionGraph with_lambda(double lambda) const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<double> mu_;
  std::vector<double> lambda_;
  GraphKind kind_;
};

struct TopologyReport {
  int n_vertices = 0;
  int n_edges = 0;
  int cycle_rank = 0;
  int parameter_count = 0;
};

InteractionGraph build_chain(int n, double mu, double lambda);
InteractionGraph build_ring(int n, double mu, double lambda);

/// First Betti number M - N + 1; throws TopologyError if the edge set does not
/// connect all n vertices.
int cycle_rank(int n, std::span<const Edge> edges);
int cycle_rank(const InteractionGraph& g);

/// Gauge-reduced parameter count K = 6M + 3N + 3L - 3.
int parameter_count(const InteractionGraph& g);

TopologyReport topology(const InteractionGraph& g);

}  // namespace tsre
