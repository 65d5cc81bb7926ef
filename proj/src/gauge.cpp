#include "tsre/gauge.hpp"

#include <algorithm>
#include <deque>

#include "tsre/errors.hpp"

namespace tsre {

bool is_rotation(const Eigen::Matrix3d& m, double tol) {
  if (!m.allFinite()) return false;
  const double orth = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return orth <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

LocalRotationSet::LocalRotationSet(std::vector<Rotation> rotations)
    : rotations_(std::move(rotations)) {
  for (std::size_t i = 0; i < rotations_.size(); ++i)
    if (!is_rotation(rotations_[i]))
      throw InvalidRotationError("matrix for vertex " + std::to_string(i + 1) +
                                 " is not a proper rotation");
}

LocalRotationSet LocalRotationSet::identity(int n) {
  return LocalRotationSet(std::vector<Rotation>(static_cast<std::size_t>(n), Rotation::Identity()));
}

Rotation random_rotation(CounterRng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

LocalRotationSet random_rotations(int n, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream, rng_tag::auxiliary + 1);
  std::vector<Rotation> rs;
  rs.reserve(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) rs.push_back(random_rotation(rng));
  return LocalRotationSet(std::move(rs));
}

TsreSample apply_gauge(const TsreSample& s, const LocalRotationSet& o) {
  const InteractionGraph& g = *s.graph;
  if (o.size() != static_cast<std::size_t>(g.vertex_count()))
    throw ShapeError("rotation set must cover every vertex");
  TsreSample out = s;
  for (std::size_t e = 0; e < s.bonds.size(); ++e) {
    const Edge& ed = g.edge(e);
    out.bonds[e] = o.at_vertex(ed.first).transpose() * s.bonds[e] * o.at_vertex(ed.second);
  }
  for (int v = 1; v <= g.vertex_count(); ++v)
    out.fields[v - 1] = o.at_vertex(v).transpose() * s.fields[v - 1];
  return out;
}

So3Svd svd_so3(const Eigen::Matrix3d& a) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Rotation u = svd.matrixU();
  Rotation v = svd.matrixV();
  Eigen::Vector3d d = svd.singularValues();
  if (u.determinant() < 0) {
    u.col(2) *= -1.0;
    d(2) = -d(2);
  }
  if (v.determinant() < 0) {
    v.col(2) *= -1.0;
    d(2) = -d(2);
  }
  // Flipping columns i and 2 of both factors keeps the product and both
  // determinants.
  for (int i = 0; i < 2; ++i) {
    Eigen::Index k;
    u.col(i).cwiseAbs().maxCoeff(&k);
    if (u(k, i) < 0) {
      u.col(i) *= -1.0;
      v.col(i) *= -1.0;
      u.col(2) *= -1.0;
      v.col(2) *= -1.0;
    }
  }
  return {u, d, v};
}

bool has_degenerate_singular_values(const Eigen::Vector3d& d, double rel_tol) {
  const double scale = std::abs(d(0));
  if (scale == 0.0) return true;
  return (std::abs(d(0)) - std::abs(d(1)) <= rel_tol * scale) ||
         (std::abs(d(1)) - std::abs(d(2)) <= rel_tol * scale);
}

namespace {

std::size_t lexicographic_root(const InteractionGraph& g) {
  std::size_t best = 0;
  auto key = [&](std::size_t e) { return std::minmax(g.edge(e).first, g.edge(e).second); };
  for (std::size_t e = 1; e < static_cast<std::size_t>(g.edge_count()); ++e)
    if (key(e) < key(best)) best = e;
  return best;
}

/// Propagates frames across `tree_edges` starting from `root` so that every
/// bond in the tree becomes symmetric and the root bond diagonal.
std::vector<Rotation> propagate_frames(const TsreSample& s, const std::vector<std::size_t>& tree_edges,
                                       std::size_t root, std::vector<bool>& degenerate) {
  const InteractionGraph& g = *s.graph;
  const int n = g.vertex_count();
  std::vector<std::optional<Rotation>> frame(static_cast<std::size_t>(n));
  std::vector<std::vector<std::size_t>> incident(static_cast<std::size_t>(n));
  for (std::size_t e : tree_edges) {
    incident[g.edge(e).first - 1].push_back(e);
    incident[g.edge(e).second - 1].push_back(e);
  }
  const Edge& r = g.edge(root);
  const So3Svd root_svd = svd_so3(s.bonds[root]);
  degenerate[root] = has_degenerate_singular_values(root_svd.d);
  frame[r.first - 1] = root_svd.u;
  frame[r.second - 1] = root_svd.v;

  std::deque<int> queue{r.first, r.second};
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    for (std::size_t e : incident[x - 1]) {
      const Edge& ed = g.edge(e);
      const int y = ed.first == x ? ed.second : ed.first;
      if (frame[y - 1]) continue;
      const So3Svd svd = svd_so3(s.bonds[e]);
      degenerate[e] = has_degenerate_singular_values(svd.d);
      if (ed.first == x)
        frame[y - 1] = svd.v * svd.u.transpose() * *frame[x - 1];
      else
        frame[y - 1] = svd.u * svd.v.transpose() * *frame[x - 1];
      queue.push_back(y);
    }
  }
  std::vector<Rotation> out;
  out.reserve(frame.size());
  for (auto& f : frame) {
    if (!f) throw TopologyError("tree edges do not span the graph");
    out.push_back(*f);
  }
  return out;
}

double max_abs_difference(const TsreSample& a, const TsreSample& b) {
  double r = 0.0;
  for (std::size_t e = 0; e < a.bonds.size(); ++e)
    r = std::max(r, (a.bonds[e] - b.bonds[e]).cwiseAbs().maxCoeff());
  for (std::size_t v = 0; v < a.fields.size(); ++v)
    r = std::max(r, (a.fields[v] - b.fields[v]).cwiseAbs().maxCoeff());
  return r;
}

CanonicalForm assemble(const TsreSample& s, std::vector<Rotation> frames, std::size_t root,
                       std::vector<bool> degenerate, std::optional<std::size_t> closing) {
  CanonicalForm form;
  form.rotations = LocalRotationSet(std::move(frames));
  form.transformed_sample = apply_gauge(s, form.rotations);
  form.first_bond = root;
  form.closing_bond = closing;

  const Eigen::Matrix3d& d = form.transformed_sample.bonds[root];
  form.first_bond_singular_values = d.diagonal();
  Eigen::Matrix3d off = d;
  off.diagonal().setZero();
  form.first_bond_offdiagonal = off.cwiseAbs().maxCoeff();

  for (std::size_t e = 0; e < form.transformed_sample.bonds.size(); ++e) {
    if (closing && e == *closing) continue;
    const Eigen::Matrix3d& b = form.transformed_sample.bonds[e];
    form.max_asymmetry = std::max(form.max_asymmetry, (b - b.transpose()).cwiseAbs().maxCoeff());
  }
  if (closing) {
    const So3Svd svd = svd_so3(form.transformed_sample.bonds[*closing]);
    degenerate[*closing] = has_degenerate_singular_values(svd.d);
    form.closing_symmetric_factors.push_back(svd.u * svd.d.asDiagonal() * svd.u.transpose());
    form.topological_rotations.push_back(svd.u * svd.v.transpose());
  }
  form.bond_degenerate = std::move(degenerate);
  form.degenerate = std::any_of(form.bond_degenerate.begin(), form.bond_degenerate.end(),
                                [](bool b) { return b; });
  form.reconstruction_residual =
      max_abs_difference(apply_gauge(s, form.rotations), form.transformed_sample);
  return form;
}

}  // namespace

CanonicalForm canonicalize_tree(const TsreSample& s) {
  const InteractionGraph& g = *s.graph;
  if (g.edge_count() == 0) throw UnsupportedTopologyError("graph has no bonds to canonicalize");
  if (cycle_rank(g) != 0) throw UnsupportedTopologyError("tree canonicalization needs cycle rank 0");
  std::vector<std::size_t> all(static_cast<std::size_t>(g.edge_count()));
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = e;
  const std::size_t root = lexicographic_root(g);
  std::vector<bool> degenerate(all.size(), false);
  auto frames = propagate_frames(s, all, root, degenerate);
  return assemble(s, std::move(frames), root, std::move(degenerate), std::nullopt);
}

CanonicalForm canonicalize_chain(const TsreSample& s) {
  if (!s.graph->is_chain()) throw UnsupportedTopologyError("sample graph is not an open chain");
  return canonicalize_tree(s);
}

CanonicalForm canonicalize_ring(const TsreSample& s) {
  const InteractionGraph& g = *s.graph;
  if (!g.is_ring()) throw UnsupportedTopologyError("sample graph is not a ring");
  std::vector<std::size_t> path(static_cast<std::size_t>(g.edge_count() - 1));
  for (std::size_t e = 0; e < path.size(); ++e) path[e] = e;
  std::vector<bool> degenerate(static_cast<std::size_t>(g.edge_count()), false);
  auto frames = propagate_frames(s, path, 0, degenerate);
  return assemble(s, std::move(frames), 0, std::move(degenerate),
                  static_cast<std::size_t>(g.edge_count() - 1));
}

CanonicalForm canonicalize(const TsreSample& s) {
  const InteractionGraph& g = *s.graph;
  const int rank = cycle_rank(g);
  if (rank == 0) return canonicalize_tree(s);
  if (rank == 1 && g.is_ring()) return canonicalize_ring(s);
  throw UnsupportedTopologyError("canonical form implemented for trees and rings only (cycle rank " +
                                 std::to_string(rank) + ")");
}

int free_parameter_count(const CanonicalForm& form) {
  const auto& bonds = form.transformed_sample.bonds;
  int count = 3 * static_cast<int>(form.transformed_sample.fields.size());
  for (std::size_t e = 0; e < bonds.size(); ++e) {
    if (e == form.first_bond)
      count += 3;
    else if (form.closing_bond && e == *form.closing_bond)
      count += 6 + 3;
    else
      count += 6;
  }
  return count;
}

}  // namespace tsre
