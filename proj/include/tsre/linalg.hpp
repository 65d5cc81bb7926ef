#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace tsre {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Conjugate-linear in `a`. Summed in fixed-size chunks whose partials are
/// combined in index order, so the result does not depend on the number of
/// OpenMP threads.
Complex dot(const Vector& a, const Vector& b);
double norm(const Vector& a);

/// Deterministic pseudo-random complex vector, entries with independent
/// standard normal real and imaginary parts, normalized to one.
Vector random_state(Eigen::Index dim, std::uint64_t seed, std::uint64_t stream, std::uint32_t tag);

}  // namespace tsre
