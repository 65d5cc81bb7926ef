#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tsre/errors.hpp"
#include "tsre/gauge.hpp"
#include "tsre/observables.hpp"

using namespace tsre;

namespace {

double max_spectrum_difference(const TsreSample& a, const TsreSample& b) {
  return (oracle::spectrum(oracle::dense_hamiltonian(a)) - oracle::spectrum(oracle::dense_hamiltonian(b)))
      .cwiseAbs()
      .maxCoeff();
}

double max_asymmetry(const Eigen::Matrix3d& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

SpinState dense_ground_state(const TsreSample& s) {
  Eigen::SelfAdjointEigenSolver<oracle::Mat> eig(oracle::dense_hamiltonian(s));
  return {eig.eigenvectors().col(0), s.n_spins()};
}

Eigen::Vector3d singular_values(const Eigen::Matrix3d& m) { return Eigen::JacobiSVD<Eigen::Matrix3d>(m).singularValues(); }

}  // namespace

TEST(Gauge, IdentityRotationsLeaveSampleUnchanged) {
  const auto s = oracle::chain_sample(5, 1.0, 3, 0);
  const auto t = apply_gauge(s, LocalRotationSet::identity(5));
  for (std::size_t e = 0; e < s.bonds.size(); ++e) EXPECT_EQ(s.bonds[e], t.bonds[e]);
  for (std::size_t v = 0; v < s.fields.size(); ++v) EXPECT_EQ(s.fields[v], t.fields[v]);
}

TEST(Gauge, RejectsImproperRotations) {
  Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
  reflect(2, 2) = -1;
  EXPECT_THROW(LocalRotationSet({reflect}), InvalidRotationError);
  EXPECT_THROW(LocalRotationSet({2.0 * Eigen::Matrix3d::Identity()}), InvalidRotationError);
  const LocalRotationSet set = random_rotations(10, 4);
  for (const auto& r : set.rotations()) EXPECT_TRUE(is_rotation(r));
}

TEST(Gauge, RandomRotationsPreserveSpectrumAndEntropy) {
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto s = oracle::chain_sample(6, 1.0, 17, i);
    const auto t = apply_gauge(s, random_rotations(6, 100 + i));
    EXPECT_LT(max_spectrum_difference(s, t), 1e-10);
    const double sa = entanglement_entropy(dense_ground_state(s), 3).entropy_bits;
    const double sb = entanglement_entropy(dense_ground_state(t), 3).entropy_bits;
    EXPECT_NEAR(sa, sb, 1e-10);
  }
}

TEST(Gauge, So3SvdExamples) {
  const auto id = svd_so3(Eigen::Matrix3d::Identity());
  EXPECT_LT((id.u - Eigen::Matrix3d::Identity()).norm(), 1e-14);
  EXPECT_LT((id.v - Eigen::Matrix3d::Identity()).norm(), 1e-14);
  EXPECT_LT((id.d - Eigen::Vector3d(1, 1, 1)).norm(), 1e-14);

  const auto d321 = svd_so3(Eigen::Vector3d(3, 2, 1).asDiagonal());
  EXPECT_LT((d321.d - Eigen::Vector3d(3, 2, 1)).norm(), 1e-14);

  const Eigen::Matrix3d a = Eigen::Vector3d(3, 2, -1).asDiagonal();
  const auto neg = svd_so3(a);
  EXPECT_LT((neg.d - Eigen::Vector3d(3, 2, -1)).norm(), 1e-14);
  EXPECT_LT((neg.u - Eigen::Matrix3d::Identity()).norm(), 1e-14);
  EXPECT_LT((neg.v - Eigen::Matrix3d::Identity()).norm(), 1e-14);
  EXPECT_LT((neg.u * neg.d.asDiagonal() * neg.v.transpose() - a).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gauge, So3SvdOnRandomMatrices) {
  CounterRng rng(8, 0, rng_tag::auxiliary);
  for (int t = 0; t < 200; ++t) {
    Eigen::Matrix3d a;
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = rng.normal();
    const auto r = svd_so3(a);
    EXPECT_NEAR(r.u.determinant(), 1.0, 1e-12);
    EXPECT_NEAR(r.v.determinant(), 1.0, 1e-12);
    EXPECT_GE(std::abs(r.d(0)), std::abs(r.d(1)));
    EXPECT_GE(std::abs(r.d(1)), std::abs(r.d(2)));
    EXPECT_GT(r.d(0), 0);
    EXPECT_GT(r.d(1), 0);
    EXPECT_EQ(r.d(2) < 0, a.determinant() < 0);
    EXPECT_LT((r.u * r.d.asDiagonal() * r.v.transpose() - a).cwiseAbs().maxCoeff(), 1e-12);
  }
  const auto zero = svd_so3(Eigen::Matrix3d::Zero());
  EXPECT_EQ(zero.d.norm(), 0.0);
  EXPECT_TRUE(has_degenerate_singular_values(zero.d));
}

TEST(Gauge, TwoSiteChainGivesDiagonalBond) {
  const auto s = oracle::chain_sample(2, 1.0, 5, 0);
  const auto form = canonicalize_chain(s);
  const Eigen::Matrix3d& b = form.transformed_sample.bonds[0];
  const auto svd = svd_so3(s.bonds[0]);
  EXPECT_LT((b - Eigen::Matrix3d(svd.d.asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gauge, ChainCanonicalForm) {
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto s = oracle::chain_sample(8, 1.0, 23, i);
    const auto form = canonicalize_chain(s);
    EXPECT_LT(form.max_asymmetry, 1e-10);
    EXPECT_LT(form.first_bond_offdiagonal, 1e-10);
    EXPECT_LT(form.reconstruction_residual, 1e-10);
    for (const auto& b : form.transformed_sample.bonds) EXPECT_LT(max_asymmetry(b), 1e-10);
    const Eigen::Vector3d d = form.first_bond_singular_values;
    EXPECT_GE(std::abs(d(0)), std::abs(d(1)));
    EXPECT_GE(std::abs(d(1)), std::abs(d(2)));
    EXPECT_FALSE(form.degenerate);
    EXPECT_LT(max_spectrum_difference(s, form.transformed_sample), 1e-10);
    EXPECT_EQ(free_parameter_count(form), parameter_count(*s.graph));
  }
}

TEST(Gauge, RingWithTrivialHolonomy) {
  // Canonicalize the open part, then choose a closing bond that is a
  // positive-definite symmetric matrix in the canonical frames.
  const auto ring = oracle::ring_sample(6, 1.0, 31, 0);
  auto chain_graph = std::make_shared<InteractionGraph>(build_chain(6, 1.0, 1.0));
  std::vector<BondMatrix> open(ring.bonds.begin(), ring.bonds.end() - 1);
  const auto chain_form = canonicalize_chain(make_sample(chain_graph, open, ring.fields));
  Eigen::Matrix3d s;
  s << 2.0, 0.3, -0.1, 0.3, 1.5, 0.2, -0.1, 0.2, 0.9;
  const auto& o = chain_form.rotations;
  std::vector<BondMatrix> bonds = open;
  bonds.push_back(o.at_vertex(6) * s * o.at_vertex(1).transpose());
  const auto built = make_sample(ring.graph, bonds, ring.fields);

  const auto form = canonicalize_ring(built);
  ASSERT_TRUE(form.closing_bond.has_value());
  EXPECT_LT(max_asymmetry(form.transformed_sample.bonds[*form.closing_bond]), 1e-9);
  EXPECT_LT((form.topological_rotations.at(0) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Gauge, RandomRingCanonicalForm) {
  for (std::uint64_t i = 0; i < 3; ++i) {
    const auto s = oracle::ring_sample(6, 1.0, 37, i);
    const auto form = canonicalize_ring(s);
    EXPECT_LT(form.max_asymmetry, 1e-10);
    EXPECT_LT(form.first_bond_offdiagonal, 1e-10);
    ASSERT_EQ(form.topological_rotations.size(), 1u);
    EXPECT_TRUE(is_rotation(form.topological_rotations[0], 1e-10));
    const Eigen::Matrix3d& closing = form.transformed_sample.bonds[*form.closing_bond];
    const Eigen::Matrix3d& sym = form.closing_symmetric_factors[0];
    EXPECT_LT(max_asymmetry(sym), 1e-12);
    EXPECT_LT((sym * form.topological_rotations[0] - closing).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(max_spectrum_difference(s, form.transformed_sample), 1e-10);
    const int m = 6, n = 6;
    EXPECT_EQ(free_parameter_count(form), 6 * m + 3 * n);
  }
}

TEST(Gauge, PathGraphTreeMatchesChain) {
  const auto s = oracle::chain_sample(6, 1.0, 41, 0);
  auto custom = std::make_shared<InteractionGraph>(6, s.graph->edges(), s.graph->mu_values(),
                                                   s.graph->lambda_values(), GraphKind::custom);
  const auto a = canonicalize_chain(s);
  const auto b = canonicalize_tree(make_sample(custom, s.bonds, s.fields));
  for (std::size_t e = 0; e < s.bonds.size(); ++e)
    EXPECT_LT((a.transformed_sample.bonds[e] - b.transformed_sample.bonds[e]).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gauge, StarGraph) {
  auto g = std::make_shared<InteractionGraph>(4, std::vector<Edge>{{1, 2}, {1, 3}, {1, 4}},
                                              std::vector<double>(3, 1.0), std::vector<double>(4, 1.0));
  const auto s = sample(g, 43, 0);
  const auto form = canonicalize(s);
  EXPECT_EQ(form.first_bond, 0u);
  EXPECT_LT(form.max_asymmetry, 1e-10);
  EXPECT_LT(form.first_bond_offdiagonal, 1e-10);
  EXPECT_LT(max_spectrum_difference(s, form.transformed_sample), 1e-10);
  EXPECT_EQ(free_parameter_count(form), 6 * 3 - 3 + 3 * 4);
}

TEST(Gauge, CanonicalFormIsAnOrbitInvariant) {
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto s = oracle::chain_sample(6, 1.0, 47, i);
    const auto t = apply_gauge(s, random_rotations(6, 500 + i));
    const auto a = canonicalize(s), b = canonicalize(t);
    for (std::size_t e = 0; e < s.bonds.size(); ++e)
      EXPECT_LT((singular_values(a.transformed_sample.bonds[e]) - singular_values(b.transformed_sample.bonds[e]))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-9);
    EXPECT_LT(max_spectrum_difference(a.transformed_sample, b.transformed_sample), 1e-9);
  }
}

TEST(Gauge, CanonicalizationIsIdempotent) {
  for (const auto& s : {oracle::chain_sample(7, 1.0, 53, 0), oracle::ring_sample(7, 1.0, 53, 1)}) {
    const auto once = canonicalize(s);
    const auto twice = canonicalize(once.transformed_sample);
    for (const auto& r : twice.rotations.rotations())
      EXPECT_LT((r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-10);
    for (std::size_t e = 0; e < s.bonds.size(); ++e)
      EXPECT_LT((once.transformed_sample.bonds[e] - twice.transformed_sample.bonds[e]).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Gauge, SymmetrizationKeepsSingularValues) {
  const auto s = oracle::ring_sample(8, 1.0, 59, 0);
  const auto form = canonicalize(s);
  for (std::size_t e = 0; e < s.bonds.size(); ++e)
    EXPECT_LT((singular_values(s.bonds[e]) - singular_values(form.transformed_sample.bonds[e])).cwiseAbs().maxCoeff(),
              1e-12);
}

TEST(Gauge, DegenerateBondIsFlagged) {
  auto s = oracle::chain_sample(4, 1.0, 61, 0);
  s.bonds[1] = Eigen::Vector3d(2.0, 2.0, 1.0).asDiagonal();
  const auto form = canonicalize(s);
  EXPECT_TRUE(form.degenerate);
  EXPECT_TRUE(form.bond_degenerate[1]);
  EXPECT_FALSE(form.bond_degenerate[0]);
}

TEST(Gauge, HigherCycleRankIsUnsupported) {
  auto g = std::make_shared<InteractionGraph>(4, std::vector<Edge>{{1, 2}, {2, 3}, {3, 4}, {4, 1}, {1, 3}},
                                              std::vector<double>(5, 1.0), std::vector<double>(4, 1.0));
  EXPECT_THROW(canonicalize(sample(g, 1, 0)), UnsupportedTopologyError);
  EXPECT_THROW(canonicalize_chain(oracle::ring_sample(5, 1.0, 1, 0)), UnsupportedTopologyError);
}
