#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "tsre/ensemble.hpp"
#include "tsre/rng.hpp"

namespace tsre {

using Rotation = Eigen::Matrix3d;

/// One SO(3) frame rotation per vertex (index v-1 for vertex v).
class LocalRotationSet {
 public:
  LocalRotationSet() = default;
  /// Throws InvalidRotationError unless every matrix is orthogonal with
  /// determinant +1 to within 1e-12.
  explicit LocalRotationSet(std::vector<Rotation> rotations);

  static LocalRotationSet identity(int n);

  std::size_t size() const noexcept { return rotations_.size(); }
  const Rotation& at_vertex(int v) const { return rotations_.at(static_cast<std::size_t>(v - 1)); }
  const std::vector<Rotation>& rotations() const noexcept { return rotations_; }

 private:
  std::vector<Rotation> rotations_;
};

bool is_rotation(const Eigen::Matrix3d& m, double tol = 1e-12);

/// Haar-distributed rotation from a unit quaternion of four normals.
Rotation random_rotation(CounterRng& rng);
LocalRotationSet random_rotations(int n, std::uint64_t seed, std::uint64_t stream = 0);

/// A' = O_first^T A O_second for every bond, b' = O_v^T b for every field.
/// The transformed Hamiltonian is a local unitary conjugate of the original.
TsreSample apply_gauge(const TsreSample& s, const LocalRotationSet& o);

/// Singular value decomposition restricted to proper rotations:
/// a = u * diag(d) * v^T with det u = det v = +1, |d0| >= |d1| >= |d2|, and only
/// d2 may be negative (sign(d2) = sign(det a)). Columns 0 and 1 of u are
/// signed so that their largest-magnitude component is positive, which makes
/// the decomposition of a diagonal or already-symmetric matrix trivial.
struct So3Svd {
  Rotation u;
  Eigen::Vector3d d;
  Rotation v;
};

So3Svd svd_so3(const Eigen::Matrix3d& a);

/// |d_i| - |d_{i+1}| below tol * |d_0| for some i (or the matrix vanishes).
bool has_degenerate_singular_values(const Eigen::Vector3d& d, double rel_tol = 1e-9);

struct CanonicalForm {
  TsreSample transformed_sample;
  LocalRotationSet rotations;
  /// Edge index whose bond was diagonalized.
  std::size_t first_bond = 0;
  Eigen::Vector3d first_bond_singular_values = Eigen::Vector3d::Zero();
  /// Edge carrying a topological rotation (rings only).
  std::optional<std::size_t> closing_bond;
  /// closing bond = symmetric_factor * topological_rotations[i]
  std::vector<Rotation> topological_rotations;
  std::vector<Eigen::Matrix3d> closing_symmetric_factors;
  std::vector<bool> bond_degenerate;
  bool degenerate = false;

  /// Largest entrywise |A - A^T| over the bonds that must be symmetric.
  double max_asymmetry = 0.0;
  /// Largest off-diagonal magnitude of the first bond.
  double first_bond_offdiagonal = 0.0;
  /// Largest entrywise difference between apply_gauge(original, rotations)
  /// and transformed_sample.
  double reconstruction_residual = 0.0;
};

/// Symmetrizes every bond of an open chain and diagonalizes bond (1,2).
CanonicalForm canonicalize_chain(const TsreSample& s);
/// Chain recursion along (1,2)..(N-1,N); the closing bond (N,1) is returned
/// as a symmetric factor times a topological rotation.
CanonicalForm canonicalize_ring(const TsreSample& s);
/// Breadth-first recursion from the lexicographically smallest edge.
CanonicalForm canonicalize_tree(const TsreSample& s);
/// Dispatches on topology; throws UnsupportedTopologyError for anything that
/// is neither a tree nor a ring.
CanonicalForm canonicalize(const TsreSample& s);

/// Free real parameters of the stored form: 3 for the diagonal first bond,
/// 6 per other symmetric bond, 6 + 3 for a closing bond with its rotation,
/// and 3 per field.
int free_parameter_count(const CanonicalForm& form);

}  // namespace tsre
