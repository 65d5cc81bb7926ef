#include "tsre/linalg.hpp"

#include <vector>

#include "tsre/rng.hpp"

namespace tsre {

namespace {
constexpr Eigen::Index kChunk = 1 << 12;
}

Complex dot(const Vector& a, const Vector& b) {
  const Eigen::Index n = a.size();
  const Eigen::Index chunks = (n + kChunk - 1) / kChunk;
  if (chunks <= 1) return a.dot(b);
  std::vector<Complex> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static) if (chunks >= 8)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index lo = c * kChunk;
    const Eigen::Index len = std::min(kChunk, n - lo);
    partial[static_cast<std::size_t>(c)] = a.segment(lo, len).dot(b.segment(lo, len));
  }
  Complex s = 0.0;
  for (const Complex& p : partial) s += p;
  return s;
}

double norm(const Vector& a) { return std::sqrt(std::max(0.0, dot(a, a).real())); }

Vector random_state(Eigen::Index dim, std::uint64_t seed, std::uint64_t stream, std::uint32_t tag) {
  CounterRng rng(seed, stream, tag);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v(i) = Complex(re, im);
  }
  v /= norm(v);
  return v;
}

}  // namespace tsre
