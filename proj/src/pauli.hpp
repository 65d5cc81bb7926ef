#pragma once

#include <complex>
#include <cstdint>
#include <utility>

namespace tsre::detail {

/// Action of Pauli component `alpha` (0=x, 1=y, 2=z) on bit `bit` of basis
/// state `index`: returns (new index, amplitude).
inline std::pair<std::uint64_t, std::complex<double>> pauli_on_basis(std::uint64_t index, int bit,
                                                                     int alpha) {
  const std::uint64_t mask = std::uint64_t{1} << bit;
  const bool one = (index & mask) != 0;
  switch (alpha) {
    case 0: return {index ^ mask, {1.0, 0.0}};
    case 1: return {index ^ mask, one ? std::complex<double>(0.0, -1.0) : std::complex<double>(0.0, 1.0)};
    default: return {index, one ? -1.0 : 1.0};
  }
}

/// Single-site Pauli matrix element <out|P^alpha|in> for bits in {0, 1}.
inline std::complex<double> pauli_element(int alpha, int out, int in) {
  auto [idx, amp] = pauli_on_basis(static_cast<std::uint64_t>(in), 0, alpha);
  return static_cast<int>(idx) == out ? amp : std::complex<double>(0.0, 0.0);
}

}  // namespace tsre::detail
