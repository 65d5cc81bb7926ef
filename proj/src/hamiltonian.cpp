#include "tsre/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <json.hpp>

#include "pauli.hpp"
#include "tsre/errors.hpp"
#include "tsre/rng.hpp"

namespace tsre {

std::string to_string(SpinNormalization n) {
  return n == SpinNormalization::pauli ? "pauli" : "spin_half";
}

SpinNormalization spin_normalization_from_string(const std::string& name) {
  if (name == "spin_half") return SpinNormalization::spin_half;
  if (name == "pauli") return SpinNormalization::pauli;
  throw ConfigError("unknown spin normalization '" + name + "'");
}

double spin_scale(SpinNormalization n) { return n == SpinNormalization::pauli ? 1.0 : 0.5; }

SpinState SpinState::basis(int n_spins, std::uint64_t index) {
  SpinState s{Vector::Zero(Eigen::Index{1} << n_spins), n_spins};
  s.amplitudes(static_cast<Eigen::Index>(index)) = 1.0;
  return s;
}

namespace {

constexpr int kMaxSpins = 30;
constexpr int kMaxDenseSpins = 12;

inline std::uint64_t insert_zero(std::uint64_t k, int pos) {
  const std::uint64_t low = k & ((std::uint64_t{1} << pos) - 1);
  return ((k >> pos) << (pos + 1)) | low;
}

}  // namespace

HamiltonianOperator::HamiltonianOperator(const TsreSample& s, SpinNormalization normalization)
    : sample_(s), normalization_(normalization), n_(s.graph->vertex_count()) {
  if (n_ > kMaxSpins) throw ResourceError("too many spins for a state-vector operator");
  const InteractionGraph& g = *s.graph;
  const EffectiveCouplings eff = scaled_hamiltonian_inputs(s);
  const double scale = spin_scale(normalization);

  for (std::size_t e = 0; e < eff.bonds.size(); ++e)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        terms_.push_back({g.edge(e).first, a, g.edge(e).second, b, scale * scale * eff.bonds[e](a, b)});
  for (int v = 1; v <= n_; ++v)
    for (int a = 0; a < 3; ++a) terms_.push_back({v, a, 0, -1, scale * eff.fields[v - 1](a)});

  for (std::size_t e = 0; e < eff.bonds.size(); ++e) {
    Block blk;
    blk.bit_a = g.edge(e).first - 1;
    blk.bit_b = g.edge(e).second - 1;
    for (int out = 0; out < 4; ++out)
      for (int in = 0; in < 4; ++in) {
        Complex acc = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            acc += scale * scale * eff.bonds[e](a, b) * detail::pauli_element(a, out & 1, in & 1) *
                   detail::pauli_element(b, out >> 1, in >> 1);
        blk.m[out * 4 + in] = acc;
      }
    blocks_.push_back(blk);
  }

  // Each field is folded into the first bond touching its vertex.
  for (int v = 1; v <= n_; ++v) {
    std::array<Complex, 4> h{};
    for (int out = 0; out < 2; ++out)
      for (int in = 0; in < 2; ++in)
        for (int a = 0; a < 3; ++a)
          h[out * 2 + in] += scale * eff.fields[v - 1](a) * detail::pauli_element(a, out, in);
    auto owner = std::find_if(blocks_.begin(), blocks_.end(), [&](const Block& b) {
      return b.bit_a == v - 1 || b.bit_b == v - 1;
    });
    if (owner == blocks_.end()) {
      lone_sites_.push_back({v - 1, h});
      continue;
    }
    const bool on_a = owner->bit_a == v - 1;
    for (int out = 0; out < 4; ++out)
      for (int in = 0; in < 4; ++in) {
        const int oa = out & 1, ob = out >> 1, ia = in & 1, ib = in >> 1;
        if (on_a && ob == ib) owner->m[out * 4 + in] += h[oa * 2 + ia];
        if (!on_a && oa == ia) owner->m[out * 4 + in] += h[ob * 2 + ib];
      }
  }
}

void HamiltonianOperator::apply(const Vector& x, Vector& y) const {
  const Eigen::Index dim = dimension();
  if (x.size() != dim) throw ShapeError("state dimension does not match 2^N");
  y.setZero(dim);
  const double* xr = reinterpret_cast<const double*>(x.data());
  double* yr = reinterpret_cast<double*>(y.data());

  for (const Block& blk : blocks_) {
    double mr[16], mi[16];
    for (int t = 0; t < 16; ++t) {
      mr[t] = blk.m[t].real();
      mi[t] = blk.m[t].imag();
    }
    const int lo = std::min(blk.bit_a, blk.bit_b);
    const int hi = std::max(blk.bit_a, blk.bit_b);
    const std::uint64_t da = std::uint64_t{1} << blk.bit_a;
    const std::uint64_t db = std::uint64_t{1} << blk.bit_b;
    const std::int64_t groups = static_cast<std::int64_t>(dim >> 2);
#pragma omp parallel for schedule(static) if (groups >= 4096)
    for (std::int64_t k = 0; k < groups; ++k) {
      const std::uint64_t base = insert_zero(insert_zero(static_cast<std::uint64_t>(k), lo), hi);
      const std::uint64_t idx[4] = {base, base | da, base | db, base | da | db};
      double xre[4], xim[4];
      for (int l = 0; l < 4; ++l) {
        xre[l] = xr[2 * idx[l]];
        xim[l] = xr[2 * idx[l] + 1];
      }
      for (int o = 0; o < 4; ++o) {
        double re = 0.0, im = 0.0;
        for (int l = 0; l < 4; ++l) {
          re += mr[o * 4 + l] * xre[l] - mi[o * 4 + l] * xim[l];
          im += mr[o * 4 + l] * xim[l] + mi[o * 4 + l] * xre[l];
        }
        yr[2 * idx[o]] += re;
        yr[2 * idx[o] + 1] += im;
      }
    }
  }

  for (const SiteBlock& site : lone_sites_) {
    const std::uint64_t d = std::uint64_t{1} << site.bit;
    const std::int64_t groups = static_cast<std::int64_t>(dim >> 1);
#pragma omp parallel for schedule(static) if (groups >= 4096)
    for (std::int64_t k = 0; k < groups; ++k) {
      const std::uint64_t i0 = insert_zero(static_cast<std::uint64_t>(k), site.bit);
      const Complex x0 = x(static_cast<Eigen::Index>(i0));
      const Complex x1 = x(static_cast<Eigen::Index>(i0 | d));
      y(static_cast<Eigen::Index>(i0)) += site.m[0] * x0 + site.m[1] * x1;
      y(static_cast<Eigen::Index>(i0 | d)) += site.m[2] * x0 + site.m[3] * x1;
    }
  }
}

SpinState HamiltonianOperator::apply(const SpinState& x) const {
  SpinState out{Vector(), n_};
  apply(x.amplitudes, out.amplitudes);
  return out;
}

double HamiltonianOperator::norm_bound() const {
  const EffectiveCouplings eff = scaled_hamiltonian_inputs(sample_);
  const double scale = spin_scale(normalization_);
  double bound = 0.0;
  for (const auto& a : eff.bonds) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(a);
    bound += scale * scale * svd.singularValues().sum();
  }
  for (const auto& b : eff.fields) bound += scale * b.norm();
  return bound;
}

Matrix dense(const HamiltonianOperator& h) {
  if (h.n_spins() > kMaxDenseSpins)
    throw ResourceError("dense Hamiltonian limited to N <= 12, got N = " + std::to_string(h.n_spins()));
  const Eigen::Index dim = h.dimension();
  Matrix m = Matrix::Zero(dim, dim);
  for (const PauliTerm& t : h.terms()) {
    for (Eigen::Index col = 0; col < dim; ++col) {
      auto [row, amp] = detail::pauli_on_basis(static_cast<std::uint64_t>(col), t.site_a - 1, t.alpha);
      if (t.site_b != 0) {
        auto [r2, amp_b] = detail::pauli_on_basis(row, t.site_b - 1, t.beta);
        row = r2;
        amp *= amp_b;
      }
      m(static_cast<Eigen::Index>(row), col) += t.coefficient * amp;
    }
  }
  return m;
}

void export_dense(const HamiltonianOperator& h, const std::filesystem::path& stem) {
  const Matrix m = dense(h);
  std::filesystem::path bin = stem;
  bin += ".bin";
  std::filesystem::path header = stem;
  header += ".json";
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + bin.string());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double parts[2] = {m(r, c).real(), m(r, c).imag()};
      out.write(reinterpret_cast<const char*>(parts), sizeof(parts));
    }
  nlohmann::json j = {{"format", "complex128-row-major-interleaved"},
                      {"byte_order", std::endian::native == std::endian::little ? "little" : "big"},
                      {"rows", m.rows()},
                      {"cols", m.cols()},
                      {"n_spins", h.n_spins()},
                      {"normalization", to_string(h.normalization())},
                      {"basis", "spin j is bit j-1 from the least significant end; bit 0 is +1 of sigma^3"},
                      {"data", bin.filename().string()}};
  std::ofstream(header) << j.dump(2) << "\n";
}

Vector apply_time_reversal(const Vector& x, int n_spins) {
  const Eigen::Index dim = x.size();
  const std::uint64_t all = (std::uint64_t{1} << n_spins) - 1;
  Vector out(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto bits = static_cast<std::uint64_t>(i);
    // (iY)|0> = -|1>, (iY)|1> = |0>: one sign per zero bit.
    const int zeros = n_spins - std::popcount(bits);
    const double sign = (zeros & 1) ? -1.0 : 1.0;
    out(static_cast<Eigen::Index>(bits ^ all)) = sign * std::conj(x(i));
  }
  return out;
}

double time_reversal_commutator_norm(const HamiltonianOperator& h, int probes) {
  double worst = 0.0;
  Vector hx, htx;
  for (int p = 0; p < probes; ++p) {
    const Vector x = random_state(h.dimension(), h.sample().seed, h.sample().realization_index,
                                  rng_tag::auxiliary + 16 + static_cast<std::uint32_t>(p));
    h.apply(apply_time_reversal(x, h.n_spins()), htx);
    h.apply(x, hx);
    worst = std::max(worst, norm(htx - apply_time_reversal(hx, h.n_spins())));
  }
  return worst;
}

double time_reversal_commutator_norm_dense(const HamiltonianOperator& h) {
  const Matrix m = dense(h);
  const Eigen::Index dim = m.rows();
  const std::uint64_t all = static_cast<std::uint64_t>(dim - 1);
  Matrix u = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto bits = static_cast<std::uint64_t>(i);
    const int zeros = h.n_spins() - std::popcount(bits);
    u(static_cast<Eigen::Index>(bits ^ all), i) = (zeros & 1) ? -1.0 : 1.0;
  }
  return (m * u - u * m.conjugate()).norm() / std::sqrt(static_cast<double>(dim));
}

}  // namespace tsre
