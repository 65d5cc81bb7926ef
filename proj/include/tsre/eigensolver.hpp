#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tsre/errors.hpp"
#include "tsre/hamiltonian.hpp"
#include "tsre/linalg.hpp"

namespace tsre {

/// y = A x for a Hermitian A.
using LinearOperator = std::function<void(const Vector& x, Vector& y)>;

struct KrylovOptions {
  /// Residual tolerance, relative to the running norm estimate.
  double tol = 1e-10;
  /// Restart cycles before giving up.
  int max_restarts = 500;
  /// Krylov basis size per cycle.
  int basis_size = 40;
  /// Ritz vectors retained across a thick restart.
  int keep = 12;
};

struct KrylovResult {
  std::vector<double> values;
  std::vector<Vector> vectors;
  std::vector<double> residuals;
  /// Lowest Ritz value at the end of every cycle.
  std::vector<double> ritz_history;
  double norm_estimate = 0.0;
  double spectrum_min = 0.0;
  double spectrum_max = 0.0;
  int matvecs = 0;
  int restarts = 0;
  bool converged = false;
};

/// Thick-restart Lanczos with full (two-pass Gram-Schmidt) reorthogonalization
/// for the `nev` lowest eigenpairs of a Hermitian operator. Only the first
/// `required` pairs must meet the tolerance. Every Krylov vector is kept
/// orthogonal to `deflation`, so the search runs in their orthogonal
/// complement.
KrylovResult lanczos_lowest(const LinearOperator& op, Eigen::Index dim, int nev, int required,
                            Vector start, std::span<const Vector> deflation,
                            const KrylovOptions& options = {});

struct GroundSolution {
  double e0 = 0.0;
  double e1 = 0.0;
  SpinState psi0;
  SpinState psi1;
  double gap = 0.0;
  int iterations = 0;
  std::array<double, 2> residual_norms{};
  bool degenerate_flag = false;
  double spectral_range = 0.0;
  std::vector<double> ritz_history;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, GroundSolution best)
      : Error("convergence", what), best_(std::move(best)) {}
  const GroundSolution& best() const noexcept { return best_; }

 private:
  GroundSolution best_;
};

struct SolverOptions {
  KrylovOptions krylov;
  /// Pairs with gap < degeneracy_tol * spectral range are flagged degenerate.
  double degeneracy_tol = 1e-8;
};

/// Two lowest eigenpairs. psi0 comes from a Lanczos run seeded from the
/// sample's (seed, realization); psi1 from a second run deflated against
/// psi0, which also recovers an exactly degenerate partner. Throws
/// ConvergenceError carrying the best iterates.
GroundSolution lowest_two(const HamiltonianOperator& h, const SolverOptions& options = {});
GroundSolution lowest_two(const HamiltonianOperator& h, double tol, int max_iter);

/// Ground state only: e1 and gap are NaN, psi1 empty, degenerate_flag false.
GroundSolution lowest_one(const HamiltonianOperator& h, const SolverOptions& options = {});

}  // namespace tsre
