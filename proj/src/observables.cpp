#include "tsre/observables.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "pauli.hpp"
#include "tsre/errors.hpp"

namespace tsre {

namespace {

void check_normalized(const SpinState& psi) {
  const double n = norm(psi.amplitudes);
  if (std::abs(n - 1.0) > 1e-8)
    throw NormalizationError("state norm " + std::to_string(n) + " differs from 1");
}

Vector apply_spin(const Vector& psi, int site, int alpha, double scale) {
  Vector out(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    auto [j, amp] = detail::pauli_on_basis(static_cast<std::uint64_t>(i), site - 1, alpha);
    out(static_cast<Eigen::Index>(j)) = scale * amp * psi(i);
  }
  return out;
}

double fluctuation(const TwoPointTable& t) {
  double acc = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) acc += std::norm(t.joint[a][b] - t.at_j[a] * t.at_k[b]);
  return acc / 9.0;
}

}  // namespace

double entropy_from_spectrum(std::span<const double> spectrum) {
  double s = 0.0;
  for (double p : spectrum)
    if (p >= 1e-14) s -= p * std::log2(p);
  return s;
}

EntropyResult entanglement_entropy(const SpinState& psi, int cut) {
  const int n = psi.n_spins;
  if (cut < 1 || cut > n - 1) throw DomainError("cut must lie in [1, N-1]");
  if (psi.dimension() != (Eigen::Index{1} << n)) throw ShapeError("state dimension does not match 2^N");
  check_normalized(psi);
  const Eigen::Index rows = Eigen::Index{1} << cut;
  const Eigen::Index cols = Eigen::Index{1} << (n - cut);
  Eigen::Map<const Matrix> m(psi.amplitudes.data(), rows, cols);
  Eigen::BDCSVD<Matrix> svd(m);
  const Eigen::VectorXd s = svd.singularValues();

  EntropyResult r;
  r.cut_position = cut;
  r.schmidt_spectrum.reserve(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) r.schmidt_spectrum.push_back(s(i) * s(i));
  std::sort(r.schmidt_spectrum.begin(), r.schmidt_spectrum.end(), std::greater<>());
  const double total = std::accumulate(r.schmidt_spectrum.begin(), r.schmidt_spectrum.end(), 0.0);
  for (double& p : r.schmidt_spectrum) p /= total;
  r.entropy_bits = entropy_from_spectrum(r.schmidt_spectrum);
  return r;
}

int effective_rank(std::span<const double> spectrum, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  double acc = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    acc += spectrum[i];
    if (acc >= 1.0 - epsilon) return static_cast<int>(i + 1);
  }
  return static_cast<int>(spectrum.size());
}

TwoPointTable two_point_table(const SpinState& psi, int j, int k, SpinNormalization normalization) {
  if (j == k) throw DomainError("correlation needs distinct sites");
  if (j < 1 || j > psi.n_spins || k < 1 || k > psi.n_spins) throw DomainError("site outside [1, N]");
  check_normalized(psi);
  const double scale = spin_scale(normalization);
  TwoPointTable t;
  std::array<Vector, 3> sj, sk;
  for (int a = 0; a < 3; ++a) {
    sj[a] = apply_spin(psi.amplitudes, j, a, scale);
    sk[a] = apply_spin(psi.amplitudes, k, a, scale);
    t.at_j[a] = dot(psi.amplitudes, sj[a]);
    t.at_k[a] = dot(psi.amplitudes, sk[a]);
  }
  // s_j and s_k commute and are Hermitian: <psi|s_j s_k|psi> = <s_j psi|s_k psi>.
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) t.joint[a][b] = dot(sj[a], sk[b]);
  return t;
}

double correlation_fluctuation(const SpinState& psi, int j, int k, SpinNormalization normalization) {
  return fluctuation(two_point_table(psi, j, k, normalization));
}

CorrelationProfile ring_correlation_profile(const SpinState& psi, const InteractionGraph& graph,
                                            SpinNormalization normalization) {
  if (!graph.is_ring()) throw BoundaryMismatchError("ring correlation profile needs a periodic chain");
  const int n = graph.vertex_count();
  if (psi.n_spins != n) throw ShapeError("state and graph sizes differ");
  check_normalized(psi);
  const double scale = spin_scale(normalization);

  std::vector<std::array<Vector, 3>> applied(static_cast<std::size_t>(n));
  std::vector<std::array<Complex, 3>> one_point(static_cast<std::size_t>(n));
  for (int site = 1; site <= n; ++site)
    for (int a = 0; a < 3; ++a) {
      applied[site - 1][a] = apply_spin(psi.amplitudes, site, a, scale);
      one_point[site - 1][a] = dot(psi.amplitudes, applied[site - 1][a]);
    }

  Eigen::MatrixXd pair = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      TwoPointTable t;
      t.at_j = one_point[j];
      t.at_k = one_point[k];
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) t.joint[a][b] = dot(applied[j][a], applied[k][b]);
      pair(j, k) = pair(k, j) = fluctuation(t);
    }

  CorrelationProfile profile;
  profile.boundary = Boundary::periodic;
  for (int r = 1; r < n; ++r) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += pair(i, (i + r) % n);
    profile.c_of_r.push_back(acc / n);
  }
  return profile;
}

}  // namespace tsre
