#include "tsre/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsre/rng.hpp"

namespace tsre {

namespace {

/// Two passes of classical Gram-Schmidt against the first `cols` basis
/// columns and the deflation set. Returns the first-pass coefficients.
Vector orthogonalize(Vector& w, const Matrix& basis, Eigen::Index cols,
                     std::span<const Vector> deflation) {
  Vector first;
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vector& d : deflation) w -= dot(d, w) * d;
    if (cols > 0) {
      Vector h = basis.leftCols(cols).adjoint() * w;
      w.noalias() -= basis.leftCols(cols) * h;
      if (pass == 0) first = std::move(h);
    }
  }
  return first;
}

}  // namespace

KrylovResult lanczos_lowest(const LinearOperator& op, Eigen::Index dim, int nev, int required,
                            Vector start, std::span<const Vector> deflation,
                            const KrylovOptions& options) {
  const Eigen::Index available = dim - static_cast<Eigen::Index>(deflation.size());
  if (nev < 1 || required < 1 || required > nev)
    throw DomainError("need 1 <= required <= nev");
  if (available < nev) throw DomainError("search space smaller than the number of eigenpairs");
  if (!(options.tol > 0)) throw DomainError("tolerance must be positive");

  const Eigen::Index m = std::min<Eigen::Index>(std::max(options.basis_size, nev + 2), available);
  const Eigen::Index keep = std::clamp<Eigen::Index>(options.keep, nev, std::max<Eigen::Index>(nev, m - 2));

  KrylovResult result;
  Matrix basis(dim, m + 1);
  Matrix t = Matrix::Zero(m, m);
  std::uint64_t fresh_stream = 0;
  auto fresh_vector = [&]() {
    return random_state(dim, 0x5eed5eedull, fresh_stream++, rng_tag::solver + 0x1000);
  };

  orthogonalize(start, basis, 0, deflation);
  double nrm = norm(start);
  if (!(nrm > 1e-12)) {
    start = fresh_vector();
    orthogonalize(start, basis, 0, deflation);
    nrm = norm(start);
  }
  basis.col(0) = start / nrm;

  Eigen::Index kept = 0;
  Vector w(dim);
  double tiny = std::numeric_limits<double>::min();
  result.spectrum_min = std::numeric_limits<double>::infinity();
  result.spectrum_max = -std::numeric_limits<double>::infinity();

  for (int cycle = 0;; ++cycle) {
    Eigen::Index size = m;
    double beta_last = 0.0;
    bool exhausted = false;
    for (Eigen::Index j = kept; j < m; ++j) {
      const Vector vj = basis.col(j);
      op(vj, w);
      ++result.matvecs;
      const Vector h = orthogonalize(w, basis, j + 1, deflation);
      for (Eigen::Index i = 0; i <= j; ++i) {
        t(i, j) = h(i);
        t(j, i) = std::conj(h(i));
      }
      t(j, j) = h(j).real();
      const double beta = norm(w);
      const double scale = std::max({result.norm_estimate, std::abs(h(j)), tiny});
      if (beta <= 1e-13 * scale) {
        if (j + 1 == available) {
          size = j + 1;
          exhausted = true;
          break;
        }
        if (j + 1 < m) {
          // Invariant subspace found: continue with an unrelated direction.
          Vector r = fresh_vector();
          orthogonalize(r, basis, j + 1, deflation);
          basis.col(j + 1) = r / norm(r);
          continue;
        }
      }
      if (j + 1 < m) {
        basis.col(j + 1) = w / beta;
      } else {
        beta_last = beta;
        if (beta > 0) basis.col(m) = w / beta;
      }
    }

    Eigen::SelfAdjointEigenSolver<Matrix> eig(t.topLeftCorner(size, size));
    const Eigen::VectorXd theta = eig.eigenvalues();
    const Matrix& y = eig.eigenvectors();
    result.norm_estimate =
        std::max({result.norm_estimate, std::abs(theta(0)), std::abs(theta(size - 1))});
    result.spectrum_min = std::min(result.spectrum_min, theta(0));
    result.spectrum_max = std::max(result.spectrum_max, theta(size - 1));
    result.ritz_history.push_back(theta(0));
    result.restarts = cycle;

    const int nout = static_cast<int>(std::min<Eigen::Index>(nev, size));
    std::vector<double> residuals(static_cast<std::size_t>(nout));
    bool converged = true;
    for (int i = 0; i < nout; ++i) {
      residuals[static_cast<std::size_t>(i)] = exhausted ? 0.0 : beta_last * std::abs(y(size - 1, i));
      if (i < required && residuals[static_cast<std::size_t>(i)] > options.tol * result.norm_estimate)
        converged = false;
    }

    if (converged || exhausted || cycle >= options.max_restarts) {
      result.converged = converged || exhausted;
      const Matrix ritz = basis.leftCols(size) * y.leftCols(nout);
      for (int i = 0; i < nout; ++i) {
        result.values.push_back(theta(i));
        result.vectors.push_back(ritz.col(i));
        result.residuals.push_back(residuals[static_cast<std::size_t>(i)]);
      }
      return result;
    }

    // Thick restart: keep the lowest Ritz vectors plus the residual direction.
    const Matrix ritz = basis.leftCols(size) * y.leftCols(keep);
    basis.leftCols(keep) = ritz;
    basis.col(keep) = basis.col(m);
    t.setZero();
    for (Eigen::Index i = 0; i < keep; ++i) t(i, i) = theta(i);
    kept = keep;
  }
}

namespace {

double true_residual(const HamiltonianOperator& h, const Vector& v, double e) {
  Vector hv;
  h.apply(v, hv);
  return norm(hv - e * v);
}

}  // namespace

GroundSolution lowest_two(const HamiltonianOperator& h, const SolverOptions& options) {
  const Eigen::Index dim = h.dimension();
  if (dim < 2) throw DomainError("need at least two basis states");
  const LinearOperator op = [&h](const Vector& x, Vector& y) { h.apply(x, y); };
  const auto seed = h.sample().seed;
  const auto stream = h.sample().realization_index;

  Vector start = random_state(dim, seed, stream, rng_tag::solver + 0);
  const int nev_first = dim >= 3 ? 2 : 1;
  KrylovResult first = lanczos_lowest(op, dim, nev_first, 1, start, {}, options.krylov);

  GroundSolution sol;
  sol.e0 = first.values[0];
  sol.psi0 = {first.vectors[0] / norm(first.vectors[0]), h.n_spins()};
  sol.ritz_history = first.ritz_history;

  Vector start2 = random_state(dim, seed, stream, rng_tag::solver + 1);
  if (first.vectors.size() > 1) start2 = first.vectors[1] + 0.1 * start2;
  const Vector deflate[] = {sol.psi0.amplitudes};
  KrylovResult second = lanczos_lowest(op, dim, 1, 1, start2, deflate, options.krylov);
  sol.e1 = second.values[0];
  sol.psi1 = {second.vectors[0] / norm(second.vectors[0]), h.n_spins()};
  if (sol.e1 < sol.e0) {
    std::swap(sol.e0, sol.e1);
    std::swap(sol.psi0, sol.psi1);
  }
  sol.gap = std::max(0.0, sol.e1 - sol.e0);
  sol.iterations = first.matvecs + second.matvecs;
  sol.residual_norms = {true_residual(h, sol.psi0.amplitudes, sol.e0),
                        true_residual(h, sol.psi1.amplitudes, sol.e1)};
  sol.spectral_range = std::max(first.spectrum_max, second.spectrum_max) - sol.e0;
  sol.degenerate_flag = sol.gap < options.degeneracy_tol * sol.spectral_range;

  if (!first.converged || !second.converged) {
    throw ConvergenceError("Lanczos did not reach residual " + std::to_string(options.krylov.tol) +
                               " within " + std::to_string(options.krylov.max_restarts) + " restarts",
                           std::move(sol));
  }
  return sol;
}

GroundSolution lowest_two(const HamiltonianOperator& h, double tol, int max_iter) {
  SolverOptions opts;
  opts.krylov.tol = tol;
  opts.krylov.max_restarts = max_iter;
  return lowest_two(h, opts);
}

GroundSolution lowest_one(const HamiltonianOperator& h, const SolverOptions& options) {
  const Eigen::Index dim = h.dimension();
  const LinearOperator op = [&h](const Vector& x, Vector& y) { h.apply(x, y); };
  Vector start = random_state(dim, h.sample().seed, h.sample().realization_index, rng_tag::solver + 0);
  KrylovResult run = lanczos_lowest(op, dim, 1, 1, start, {}, options.krylov);

  GroundSolution sol;
  sol.e0 = run.values[0];
  sol.psi0 = {run.vectors[0] / norm(run.vectors[0]), h.n_spins()};
  sol.e1 = sol.gap = std::numeric_limits<double>::quiet_NaN();
  sol.ritz_history = run.ritz_history;
  sol.iterations = run.matvecs;
  sol.residual_norms = {true_residual(h, sol.psi0.amplitudes, sol.e0), 0.0};
  sol.spectral_range = run.spectrum_max - sol.e0;
  if (!run.converged)
    throw ConvergenceError("Lanczos did not reach residual " + std::to_string(options.krylov.tol) +
                               " within " + std::to_string(options.krylov.max_restarts) + " restarts",
                           std::move(sol));
  return sol;
}

}  // namespace tsre
