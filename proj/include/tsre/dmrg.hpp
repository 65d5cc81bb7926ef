#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "tsre/eigensolver.hpp"
#include "tsre/ensemble.hpp"
#include "tsre/hamiltonian.hpp"
#include "tsre/observables.hpp"

namespace tsre {

/// Site tensor W[a][b] (2x2 operator <s'|W|s>) with a in [0, left_dim),
/// b in [0, right_dim). Channel layout: 0 nothing placed yet, 1..3 a spin
/// component emitted and waiting for its partner, 4 all terms completed.
struct MpoSite {
  int left_dim = 0;
  int right_dim = 0;
  std::vector<Eigen::Matrix2cd> ops;
  std::vector<bool> nonzero;

  const Eigen::Matrix2cd& at(int a, int b) const { return ops[static_cast<std::size_t>(a * right_dim + b)]; }
  bool has(int a, int b) const { return nonzero[static_cast<std::size_t>(a * right_dim + b)]; }
};

struct MatrixProductOperator {
  std::vector<MpoSite> sites;
  SpinNormalization normalization = SpinNormalization::spin_half;
  double norm_bound = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t realization_index = 0;

  int n_sites() const { return static_cast<int>(sites.size()); }
};

/// Exact bond-dimension-5 encoding of an open-chain sample. Throws
/// UnsupportedTopologyError for any other graph.
MatrixProductOperator build_mpo(const TsreSample& s,
                                SpinNormalization normalization = SpinNormalization::spin_half);

/// Full contraction to a 2^N x 2^N matrix (N <= 12), same basis convention as
/// the state-vector operator.
Matrix contract_mpo(const MatrixProductOperator& mpo);

struct MatrixProductState {
  /// tensors[i][s] is left_dim x right_dim.
  std::vector<std::array<Matrix, 2>> tensors;
  int canonical_center = 0;

  int n_sites() const { return static_cast<int>(tensors.size()); }
  /// Bond dimensions between consecutive sites (size N-1).
  std::vector<int> bond_dims() const;
};

MatrixProductState random_mps(int n_sites, int chi, std::uint64_t seed, std::uint64_t stream);
MatrixProductState product_mps(const std::vector<Eigen::Vector2cd>& local_states);

/// Expands to a 2^N amplitude vector (N <= 24).
SpinState to_state_vector(const MatrixProductState& mps);
/// <a|b>.
Complex overlap(const MatrixProductState& a, const MatrixProductState& b);
/// <psi|H|psi> / <psi|psi>.
double expectation(const MatrixProductState& psi, const MatrixProductOperator& mpo);

struct DmrgOptions {
  int chi_max = 64;
  int chi_initial = 8;
  int max_sweeps = 20;
  /// Convergence when one full sweep changes the energy by less than this.
  double energy_tol = 1e-10;
  /// Keep the smallest chi whose discarded weight is below this. At 1e-10
  /// the truncation noise (~1e-11 in the energy) exceeds the 1e-12 sweep
  /// monotonicity tolerance, hence the tighter default.
  double truncation_weight = 1e-12;
  KrylovOptions local{1e-12, 50, 24, 6};
};

struct DmrgDiagnostics {
  /// Objective (energy, plus penalty for excited runs) after each half-sweep.
  std::vector<double> half_sweep_energies;
  std::vector<int> chi_schedule;
  double max_discarded_weight = 0.0;
  int sweeps = 0;
  bool converged = false;
  /// Set when the sweep budget ran out before convergence.
  bool warning = false;
  /// Excited runs only: |<ground|psi>|.
  double ground_overlap = 0.0;
  double penalty_weight = 0.0;
};

struct DmrgResult {
  double energy = 0.0;
  MatrixProductState mps;
  DmrgDiagnostics diagnostics;
};

/// Two-site finite-size DMRG with chi ramped geometrically from chi_initial
/// to chi_max. Starts from a random MPS seeded by the MPO's sample seed.
DmrgResult dmrg_ground(const MatrixProductOperator& mpo, const DmrgOptions& options = {});
DmrgResult dmrg_ground(const MatrixProductOperator& mpo, int chi_max, int sweeps, double energy_tol);

/// 10 x (2 x norm bound), an upper bound on ten times the spectral range.
double default_penalty_weight(const MatrixProductOperator& mpo);

/// Minimizes <H> + penalty_weight |<ground|psi>|^2. Throws
/// ExcitedStateFailure if the result overlaps the ground state by 1e-6 or more.
DmrgResult dmrg_first_excited(const MatrixProductOperator& mpo, const MatrixProductState& ground,
                              double penalty_weight, const DmrgOptions& options = {});

/// Entropy across the bond between sites cut and cut+1 (1-based spins).
EntropyResult mps_entropy(const MatrixProductState& mps, int cut);
/// Same quantity as correlation_fluctuation(), by transfer-matrix contraction.
double mps_correlation(const MatrixProductState& mps, int j, int k,
                       SpinNormalization normalization = SpinNormalization::spin_half);

struct CheckpointInfo {
  std::uint64_t seed = 0;
  std::uint64_t realization_index = 0;
  std::vector<double> sweep_log;
};

/// Writes `<stem>.bin` (raw complex128 tensor data, site-major, column-major
/// blocks) and `<stem>.json` (shapes, center, seeds, sweep log).
void save_checkpoint(const MatrixProductState& mps, const CheckpointInfo& info,
                     const std::filesystem::path& stem);
MatrixProductState load_checkpoint(const std::filesystem::path& stem, CheckpointInfo* info = nullptr);

}  // namespace tsre
