#include "pauli.hpp"
#include "tsre/errors.hpp"
#include "tsre/hamiltonian.hpp"

namespace tsre {

void HamiltonianOperator::apply_reference(const Vector& x, Vector& y) const {
  const Eigen::Index dim = dimension();
  if (x.size() != dim) throw ShapeError("state dimension does not match 2^N");
  y.setZero(dim);
  for (const PauliTerm& t : terms_) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      auto [j, amp] = detail::pauli_on_basis(static_cast<std::uint64_t>(i), t.site_a - 1, t.alpha);
      if (t.site_b != 0) {
        auto [k, amp_b] = detail::pauli_on_basis(j, t.site_b - 1, t.beta);
        j = k;
        amp *= amp_b;
      }
      y(static_cast<Eigen::Index>(j)) += t.coefficient * amp * x(i);
    }
  }
}

}  // namespace tsre
