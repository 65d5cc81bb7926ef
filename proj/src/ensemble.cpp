#include "tsre/ensemble.hpp"

#include "tsre/errors.hpp"
#include "tsre/rng.hpp"

namespace tsre {

TsreSample sample(GraphPtr graph, std::uint64_t seed, std::uint64_t realization_index) {
  if (!graph) throw ConfigError("sample requires a graph");
  TsreSample s;
  s.seed = seed;
  s.realization_index = realization_index;
  s.bonds.resize(static_cast<std::size_t>(graph->edge_count()));
  s.fields.resize(static_cast<std::size_t>(graph->vertex_count()));
  for (std::size_t e = 0; e < s.bonds.size(); ++e) {
    CounterRng rng(seed, realization_index, rng_tag::bond + static_cast<std::uint32_t>(e));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) s.bonds[e](r, c) = rng.normal();
  }
  for (std::size_t v = 0; v < s.fields.size(); ++v) {
    CounterRng rng(seed, realization_index, rng_tag::field + static_cast<std::uint32_t>(v));
    for (int a = 0; a < 3; ++a) s.fields[v](a) = rng.normal();
  }
  s.graph = std::move(graph);
  return s;
}

TsreSample make_sample(GraphPtr graph, std::vector<BondMatrix> bonds,
                       std::vector<FieldVector> fields, std::uint64_t seed,
                       std::uint64_t realization_index) {
  if (!graph) throw ConfigError("sample requires a graph");
  if (bonds.size() != static_cast<std::size_t>(graph->edge_count()))
    throw ShapeError("one bond matrix per edge required");
  if (fields.size() != static_cast<std::size_t>(graph->vertex_count()))
    throw ShapeError("one field vector per vertex required");
  for (const auto& b : bonds)
    if (!b.allFinite()) throw DomainError("bond matrix has non-finite entries");
  for (const auto& f : fields)
    if (!f.allFinite()) throw DomainError("field vector has non-finite entries");
  return TsreSample{std::move(graph), std::move(bonds), std::move(fields), seed,
                    realization_index};
}

EffectiveCouplings scaled_hamiltonian_inputs(const TsreSample& s) {
  EffectiveCouplings out;
  out.bonds.reserve(s.bonds.size());
  out.fields.reserve(s.fields.size());
  for (std::size_t e = 0; e < s.bonds.size(); ++e) out.bonds.push_back(s.graph->mu(e) * s.bonds[e]);
  for (std::size_t v = 0; v < s.fields.size(); ++v)
    out.fields.push_back(s.graph->lambda(static_cast<int>(v) + 1) * s.fields[v]);
  return out;
}

}  // namespace tsre
