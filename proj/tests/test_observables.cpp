#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tsre/eigensolver.hpp"
#include "tsre/errors.hpp"
#include "tsre/gauge.hpp"
#include "tsre/observables.hpp"

using namespace tsre;

namespace {

SpinState bell_pair() {
  // Singlet of spins 1 and 2: (|01> - |10>) / sqrt 2.
  Vector v = Vector::Zero(4);
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = -1.0 / std::sqrt(2.0);
  return {v, 2};
}

/// Direct evaluation from Kronecker-built operators.
double oracle_fluctuation(const SpinState& psi, int j, int k, double scale) {
  const auto p = oracle::pauli();
  const int n = psi.n_spins;
  const Vector& x = psi.amplitudes;
  double sum = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const oracle::Mat sa = scale * oracle::site_operator(p[a], j, n);
      const oracle::Mat sb = scale * oracle::site_operator(p[b], k, n);
      const Complex joint = x.dot(sa * sb * x);
      const Complex dj = x.dot(sa * x), dk = x.dot(sb * x);
      sum += std::norm(joint - dj * dk);
    }
  return sum / 9.0;
}

SpinState ground(const TsreSample& s) { return lowest_one(HamiltonianOperator(s)).psi0; }

}  // namespace

TEST(Observables, ProductStateHasZeroEntropy) {
  const auto r = entanglement_entropy(SpinState::basis(6, 0b101100), 3);
  EXPECT_NEAR(r.entropy_bits, 0.0, 1e-14);
  EXPECT_NEAR(r.schmidt_spectrum.front(), 1.0, 1e-14);
  EXPECT_EQ(r.cut_position, 3);
}

TEST(Observables, BellPairHasOneBit) {
  const auto r = entanglement_entropy(bell_pair(), 1);
  EXPECT_NEAR(r.entropy_bits, 1.0, 1e-14);
  ASSERT_GE(r.schmidt_spectrum.size(), 2u);
  EXPECT_NEAR(r.schmidt_spectrum[0], 0.5, 1e-14);
  EXPECT_NEAR(r.schmidt_spectrum[1], 0.5, 1e-14);
}

TEST(Observables, MaximallyEntangledCut) {
  // Spin 1 paired with spin 3, spin 2 with spin 4: two bits across the middle.
  Vector v = Vector::Zero(16);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) v(a | b << 1 | a << 2 | b << 3) = 0.5;
  const SpinState psi{v, 4};
  EXPECT_NEAR(entanglement_entropy(psi, 2).entropy_bits, 2.0, 1e-13);
  EXPECT_NEAR(entanglement_entropy(psi, 1).entropy_bits, 1.0, 1e-13);
}

TEST(Observables, EntropySchmidtSpectrumSumsToOne) {
  const Vector v = random_state(256, 3, 0, rng_tag::auxiliary);
  const auto r = entanglement_entropy({v, 8}, 4);
  double sum = 0.0;
  for (double p : r.schmidt_spectrum) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(r.entropy_bits, entropy_from_spectrum(r.schmidt_spectrum), 1e-14);
  EXPECT_LE(r.entropy_bits, 4.0);
  for (std::size_t i = 1; i < r.schmidt_spectrum.size(); ++i)
    EXPECT_LE(r.schmidt_spectrum[i], r.schmidt_spectrum[i - 1]);
}

TEST(Observables, EntropyErrors) {
  EXPECT_THROW(entanglement_entropy({2.0 * bell_pair().amplitudes, 2}, 1), NormalizationError);
  EXPECT_THROW(entanglement_entropy(bell_pair(), 0), DomainError);
  EXPECT_THROW(entanglement_entropy(bell_pair(), 2), DomainError);
}

TEST(Observables, EffectiveRankExamples) {
  const std::vector<double> p = {0.5, 0.3, 0.2};
  EXPECT_EQ(effective_rank(p, 0.6), 1);
  EXPECT_EQ(effective_rank(p, 0.25), 2);
  EXPECT_EQ(effective_rank(p, 0.1), 3);
  EXPECT_EQ(effective_rank(std::vector<double>{1.0}, 1e-6), 1);
}

TEST(Observables, BellPairCorrelation) {
  EXPECT_NEAR(correlation_fluctuation(bell_pair(), 1, 2), 1.0 / 48.0, 1e-15);
  EXPECT_NEAR(correlation_fluctuation(bell_pair(), 1, 2, SpinNormalization::pauli), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(correlation_fluctuation(SpinState::basis(2, 1), 1, 2), 0.0, 1e-15);
}

TEST(Observables, CorrelationMatchesOracle) {
  const SpinState psi{random_state(32, 4, 0, rng_tag::auxiliary), 5};
  for (int j = 1; j <= 5; ++j)
    for (int k = 1; k <= 5; ++k) {
      if (j == k) continue;
      EXPECT_NEAR(correlation_fluctuation(psi, j, k), oracle_fluctuation(psi, j, k, 0.5), 1e-14);
      EXPECT_NEAR(correlation_fluctuation(psi, j, k), correlation_fluctuation(psi, k, j), 1e-15);
    }
}

TEST(Observables, CorrelationIsGaugeInvariant) {
  const auto s = oracle::chain_sample(8, 1.0, 40, 0);
  const SpinState a = ground(s);
  const SpinState b = ground(apply_gauge(s, random_rotations(8, 41)));
  for (int k = 2; k <= 8; ++k) EXPECT_NEAR(correlation_fluctuation(a, 1, k), correlation_fluctuation(b, 1, k), 1e-9);
}

TEST(Observables, RingProfileIsReflectionSymmetric) {
  const auto s = oracle::ring_sample(8, 1.0, 42, 0);
  const auto prof = ring_correlation_profile(ground(s), *s.graph);
  ASSERT_EQ(prof.c_of_r.size(), 7u);
  for (int r = 1; r < 8; ++r) EXPECT_NEAR(prof.c_of_r[static_cast<std::size_t>(r - 1)], prof.c_of_r[static_cast<std::size_t>(7 - r)], 1e-14);
}

TEST(Observables, ProfileNeedsRing) {
  const auto s = oracle::chain_sample(6, 1.0, 43, 0);
  EXPECT_THROW(ring_correlation_profile(ground(s), *s.graph), BoundaryMismatchError);
}
