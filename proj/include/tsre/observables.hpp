#pragma once

#include <span>
#include <vector>

#include "tsre/graph.hpp"
#include "tsre/hamiltonian.hpp"

namespace tsre {

struct EntropyResult {
  /// Von Neumann entropy in bits.
  double entropy_bits = 0.0;
  /// Squared Schmidt coefficients, descending, summing to one.
  std::vector<double> schmidt_spectrum;
  int cut_position = 0;
};

/// Entropy of spins 1..cut against cut+1..N. Throws NormalizationError if
/// |psi| deviates from one by more than 1e-8, DomainError for a bad cut.
EntropyResult entanglement_entropy(const SpinState& psi, int cut);

/// -sum p log2 p over the weights, dropping p < 1e-14.
double entropy_from_spectrum(std::span<const double> spectrum);

/// Smallest chi with sum_{i<chi} p_i >= 1 - epsilon.
int effective_rank(std::span<const double> spectrum, double epsilon);

/// Expectation <psi| s^a_j s^b_k |psi> for all nine (a, b) and the one-point
/// functions, under the given spin normalization.
struct TwoPointTable {
  std::array<std::array<Complex, 3>, 3> joint{};
  std::array<Complex, 3> at_j{};
  std::array<Complex, 3> at_k{};
};
TwoPointTable two_point_table(const SpinState& psi, int j, int k,
                              SpinNormalization normalization = SpinNormalization::spin_half);

/// (1/9) sum_{a,b} |<s^a_j s^b_k> - <s^a_j><s^b_k>|^2 for one state.
double correlation_fluctuation(const SpinState& psi, int j, int k,
                               SpinNormalization normalization = SpinNormalization::spin_half);

enum class Boundary { open, periodic };

/// c_of_r[r-1] holds C(r) for r = 1..N-1.
struct CorrelationProfile {
  std::vector<double> c_of_r;
  Boundary boundary = Boundary::periodic;
};

/// C(r) = (1/N) sum_i C(i, i+r), indices mod N. Throws BoundaryMismatchError
/// unless the graph is a ring.
CorrelationProfile ring_correlation_profile(const SpinState& psi, const InteractionGraph& graph,
                                            SpinNormalization normalization = SpinNormalization::spin_half);

}  // namespace tsre
