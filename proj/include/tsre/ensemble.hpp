#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "tsre/graph.hpp"

namespace tsre {

using BondMatrix = Eigen::Matrix3d;
using FieldVector = Eigen::Vector3d;
using GraphPtr = std::shared_ptr<const InteractionGraph>;

/// One ensemble member. `bonds[e]` belongs to graph->edge(e) and couples
/// sigma_first . A sigma_second; `fields[v-1]` belongs to vertex v.
struct TsreSample {
  GraphPtr graph;
  std::vector<BondMatrix> bonds;
  std::vector<FieldVector> fields;
  std::uint64_t seed = 0;
  std::uint64_t realization_index = 0;

  int n_spins() const { return graph->vertex_count(); }
};

/// Draws every bond entry and field component as an independent standard
/// normal. Bond e reads stream (seed, realization, rng_tag::bond + e) in
/// row-major order; vertex v reads (seed, realization, rng_tag::field + v - 1).
TsreSample sample(GraphPtr graph, std::uint64_t seed, std::uint64_t realization_index);

/// Builds a sample from explicit couplings, validating shapes and finiteness.
TsreSample make_sample(GraphPtr graph, std::vector<BondMatrix> bonds,
                       std::vector<FieldVector> fields, std::uint64_t seed = 0,
                       std::uint64_t realization_index = 0);

/// Couplings with the strength functions folded in: mu(e) A^(e), lambda(v) b^(v).
struct EffectiveCouplings {
  std::vector<BondMatrix> bonds;
  std::vector<FieldVector> fields;
};

EffectiveCouplings scaled_hamiltonian_inputs(const TsreSample& s);

}  // namespace tsre
