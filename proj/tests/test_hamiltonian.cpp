#include <gtest/gtest.h>
#include <omp.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "tsre/errors.hpp"
#include "tsre/hamiltonian.hpp"
#include "tsre/serialize.hpp"

using namespace tsre;

namespace {

Vector act(const HamiltonianOperator& h, const Vector& x) {
  Vector y(x.size());
  h.apply(x, y);
  return y;
}

TsreSample two_spin(const Eigen::Matrix3d& a) {
  auto g = std::make_shared<InteractionGraph>(build_chain(2, 1.0, 0.0));
  return make_sample(g, {a}, {FieldVector::Zero(), FieldVector::Zero()});
}

}  // namespace

TEST(Hamiltonian, MatchesKroneckerOracle) {
  for (int n = 2; n <= 6; ++n) {
    for (const auto& s : {oracle::chain_sample(n, 1.0, 11, 0), oracle::chain_sample(n, 0.3, 11, 1)}) {
      const HamiltonianOperator h(s);
      EXPECT_LT((dense(h) - oracle::dense_hamiltonian(s)).cwiseAbs().maxCoeff(), 1e-12) << "n=" << n;
    }
  }
  const auto ring = oracle::ring_sample(5, 1.0, 12, 0);
  EXPECT_LT((dense(HamiltonianOperator(ring)) - oracle::dense_hamiltonian(ring)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((dense(HamiltonianOperator(ring, SpinNormalization::pauli)) - oracle::dense_hamiltonian(ring, 1.0))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(Hamiltonian, MatrixFreeApplyMatchesOracle) {
  const auto s = oracle::chain_sample(6, 1.0, 13, 0);
  const HamiltonianOperator h(s);
  const Vector x = random_state(64, 1, 0, rng_tag::auxiliary);
  EXPECT_LT((act(h, x) - oracle::dense_hamiltonian(s) * x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Hamiltonian, TwoSpinBellBasis) {
  // sigma . diag(a, b, c) sigma is diagonal in the Bell basis with
  // eigenvalues a-b+c, -a+b+c, a+b-c, -a-b-c; spins of 1/2 scale them by 1/4.
  const double a = 1.0, b = 2.0, c = 3.0;
  const HamiltonianOperator h(two_spin(Eigen::Vector3d(a, b, c).asDiagonal()));
  const double r = 1.0 / std::sqrt(2.0);
  const std::array<Eigen::Vector4cd, 4> bell = {
      Eigen::Vector4cd(r, 0, 0, r), Eigen::Vector4cd(r, 0, 0, -r), Eigen::Vector4cd(0, r, r, 0),
      Eigen::Vector4cd(0, r, -r, 0)};
  const std::array<double, 4> expected = {a - b + c, -a + b + c, a + b - c, -a - b - c};
  for (int i = 0; i < 4; ++i) {
    const Vector v = bell[static_cast<std::size_t>(i)];
    EXPECT_LT((act(h, v) - 0.25 * expected[static_cast<std::size_t>(i)] * v).norm(), 1e-14);
  }
  const HamiltonianOperator iso(two_spin(Eigen::Matrix3d::Identity()));
  const Eigen::VectorXd spec = oracle::spectrum(dense(iso));
  EXPECT_NEAR(spec(0), -0.75, 1e-14);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(spec(i), 0.25, 1e-14);
}

TEST(Hamiltonian, LinearInCouplings) {
  const auto s1 = oracle::chain_sample(5, 1.0, 14, 0);
  const auto s2 = oracle::chain_sample(5, 1.0, 14, 1);
  std::vector<BondMatrix> bonds;
  std::vector<FieldVector> fields;
  for (std::size_t e = 0; e < s1.bonds.size(); ++e) bonds.push_back(2.0 * s1.bonds[e] - s2.bonds[e]);
  for (std::size_t v = 0; v < s1.fields.size(); ++v) fields.push_back(2.0 * s1.fields[v] - s2.fields[v]);
  const HamiltonianOperator h(make_sample(s1.graph, bonds, fields));
  const Vector x = random_state(32, 2, 0, rng_tag::auxiliary);
  const Vector expect = 2.0 * act(HamiltonianOperator(s1), x) - act(HamiltonianOperator(s2), x);
  EXPECT_LT((act(h, x) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Hamiltonian, HermitianAndTraceless) {
  const HamiltonianOperator h(oracle::ring_sample(6, 1.0, 15, 0));
  const Matrix m = dense(h);
  EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(std::abs(m.trace()), 1e-12);
  const Vector x = random_state(64, 3, 0, rng_tag::auxiliary);
  const Vector y = random_state(64, 3, 1, rng_tag::auxiliary);
  EXPECT_LT(std::abs(dot(x, act(h, y)) - std::conj(dot(y, act(h, x)))), 1e-12);
}

TEST(Hamiltonian, SecondMomentIsTheCouplingSum) {
  // tr(H^2) / 2^N = sum_e mu^2 |A|_F^2 / 16 + sum_v lambda^2 |b|^2 / 4 for spin 1/2.
  const auto s = oracle::chain_sample(6, 0.7, 16, 0);
  const Matrix m = dense(HamiltonianOperator(s));
  double expected = 0.0;
  for (const auto& a : s.bonds) expected += a.squaredNorm() / 16.0;
  for (const auto& b : s.fields) expected += 0.49 * b.squaredNorm() / 4.0;
  EXPECT_NEAR((m * m).trace().real() / 64.0, expected, 1e-12);
}

TEST(Hamiltonian, TimeReversal) {
  const auto zero_field = oracle::chain_sample(6, 0.0, 17, 0);
  EXPECT_LT(time_reversal_commutator_norm(HamiltonianOperator(zero_field)), 1e-10);
  EXPECT_LT(time_reversal_commutator_norm_dense(HamiltonianOperator(zero_field)), 1e-10);
  const auto field = oracle::chain_sample(6, 1.0, 17, 0);
  EXPECT_GT(time_reversal_commutator_norm(HamiltonianOperator(field)), 0.1);
  EXPECT_GT(time_reversal_commutator_norm_dense(HamiltonianOperator(field)), 0.1);
}

TEST(Hamiltonian, TimeReversalSquaresToMinusOneForOddN) {
  const Vector x = random_state(32, 4, 0, rng_tag::auxiliary);
  EXPECT_LT((apply_time_reversal(apply_time_reversal(x, 5), 5) + x).norm(), 1e-14);
  const Vector y = random_state(16, 4, 1, rng_tag::auxiliary);
  EXPECT_LT((apply_time_reversal(apply_time_reversal(y, 4), 4) - y).norm(), 1e-14);
}

TEST(Hamiltonian, KramersDegeneracyForOddN) {
  for (std::uint64_t i = 0; i < 3; ++i) {
    const Eigen::VectorXd spec = oracle::spectrum(dense(HamiltonianOperator(oracle::chain_sample(5, 0.0, 18, i))));
    for (int k = 0; k < 32; k += 2) EXPECT_NEAR(spec(k), spec(k + 1), 1e-10);
  }
}

TEST(Hamiltonian, SpinCommutationRelations) {
  // Single-spin Hamiltonians b . s pick out s^x, s^y, s^z.
  auto g = std::make_shared<InteractionGraph>(build_chain(2, 0.0, 1.0));
  std::array<Matrix, 3> s;
  for (int a = 0; a < 3; ++a) {
    FieldVector b = FieldVector::Zero();
    b(a) = 1.0;
    s[static_cast<std::size_t>(a)] =
        dense(HamiltonianOperator(make_sample(g, {BondMatrix::Zero()}, {b, FieldVector::Zero()})));
  }
  const Complex i(0, 1);
  EXPECT_LT((s[0] * s[1] - s[1] * s[0] - i * s[2]).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((s[1] * s[2] - s[2] * s[1] - i * s[0]).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((s[2] * s[0] - s[0] * s[2] - i * s[1]).cwiseAbs().maxCoeff(), 1e-15);
  // Basis state 0 is the +1/2 eigenstate of s^z on spin 1.
  EXPECT_NEAR(s[2](0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(s[2](1, 1).real(), -0.5, 1e-15);
}

TEST(Hamiltonian, FusedKernelAgreesWithReference) {
  for (int n : {3, 8, 12}) {
    const HamiltonianOperator h(oracle::ring_sample(n, 1.0, 19, 0));
    const Vector x = random_state(h.dimension(), 5, 0, rng_tag::auxiliary);
    Vector a(x.size()), b(x.size());
    h.apply(x, a);
    h.apply_reference(x, b);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12 * h.norm_bound());
  }
}

TEST(Hamiltonian, ApplyIsThreadCountInvariant) {
  const HamiltonianOperator h(oracle::chain_sample(12, 1.0, 20, 0));
  const Vector x = random_state(h.dimension(), 6, 0, rng_tag::auxiliary);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Vector one = act(h, x);
  omp_set_num_threads(4);
  const Vector four = act(h, x);
  omp_set_num_threads(saved);
  EXPECT_TRUE((one.array() == four.array()).all());
}

TEST(Hamiltonian, ShapeAndResourceErrors) {
  const HamiltonianOperator h(oracle::chain_sample(4, 1.0, 21, 0));
  Vector y(16);
  EXPECT_THROW(h.apply(Vector::Zero(8), y), ShapeError);
  EXPECT_THROW(dense(HamiltonianOperator(oracle::chain_sample(13, 1.0, 21, 0))), ResourceError);
}

TEST(Hamiltonian, NormBoundDominatesSpectrum) {
  const HamiltonianOperator h(oracle::ring_sample(6, 1.0, 22, 0));
  const Eigen::VectorXd spec = oracle::spectrum(dense(h));
  EXPECT_LE(std::max(-spec(0), spec(63)), h.norm_bound());
}

TEST(Hamiltonian, ExportDenseRoundTrip) {
  const HamiltonianOperator h(oracle::chain_sample(4, 1.0, 23, 0));
  const auto stem = std::filesystem::temp_directory_path() / "tsre_export_test";
  export_dense(h, stem);
  const Json meta = read_json_file(stem.string() + ".json");
  EXPECT_EQ(meta.at("n_spins").get<int>(), 4);
  std::ifstream is(stem.string() + ".bin", std::ios::binary);
  std::vector<double> raw(2 * 16 * 16);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(double)));
  ASSERT_TRUE(is.good());
  const Matrix m = dense(h);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) {
      EXPECT_EQ(raw[static_cast<std::size_t>(2 * (16 * r + c))], m(r, c).real());
      EXPECT_EQ(raw[static_cast<std::size_t>(2 * (16 * r + c) + 1)], m(r, c).imag());
    }
  std::filesystem::remove(stem.string() + ".json");
  std::filesystem::remove(stem.string() + ".bin");
}
