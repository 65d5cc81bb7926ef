#include "tsre/dmrg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "tsre/errors.hpp"
#include "tsre/rng.hpp"

namespace tsre {

namespace {

using Env = std::vector<Matrix>;
using SiteTensor = std::array<Matrix, 2>;

Eigen::Matrix2cd spin_matrix(int alpha, double scale) {
  Eigen::Matrix2cd m;
  switch (alpha) {
    case 0: m << 0, 1, 1, 0; break;
    case 1: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return scale * m;
}

constexpr int kChannels = 5;
constexpr int kDone = 4;

}  // namespace

std::vector<int> MatrixProductState::bond_dims() const {
  std::vector<int> dims;
  for (std::size_t i = 0; i + 1 < tensors.size(); ++i) dims.push_back(static_cast<int>(tensors[i][0].cols()));
  return dims;
}

MatrixProductOperator build_mpo(const TsreSample& s, SpinNormalization normalization) {
  const InteractionGraph& g = *s.graph;
  if (!g.is_chain()) throw UnsupportedTopologyError("MPO construction needs an open chain");
  const int n = g.vertex_count();
  const EffectiveCouplings eff = scaled_hamiltonian_inputs(s);
  const double scale = spin_scale(normalization);
  std::array<Eigen::Matrix2cd, 3> sigma;
  for (int a = 0; a < 3; ++a) sigma[a] = spin_matrix(a, scale);

  MatrixProductOperator mpo;
  mpo.normalization = normalization;
  mpo.seed = s.seed;
  mpo.realization_index = s.realization_index;
  mpo.norm_bound = HamiltonianOperator(s, normalization).norm_bound();

  for (int site = 0; site < n; ++site) {
    MpoSite w;
    w.left_dim = site == 0 ? 1 : kChannels;
    w.right_dim = site == n - 1 ? 1 : kChannels;
    w.ops.assign(static_cast<std::size_t>(w.left_dim * w.right_dim), Eigen::Matrix2cd::Zero());
    w.nonzero.assign(w.ops.size(), false);
    // Full 5x5 layout, then restricted to the boundary row/column.
    auto set = [&](int a, int b, const Eigen::Matrix2cd& op) {
      const int ra = site == 0 ? (a == 0 ? 0 : -1) : a;
      const int rb = site == n - 1 ? (b == kDone ? 0 : -1) : b;
      if (ra < 0 || rb < 0) return;
      const auto idx = static_cast<std::size_t>(ra * w.right_dim + rb);
      w.ops[idx] += op;
      w.nonzero[idx] = true;
    };
    set(0, 0, Eigen::Matrix2cd::Identity());
    set(kDone, kDone, Eigen::Matrix2cd::Identity());
    if (site + 1 < n)
      for (int a = 0; a < 3; ++a) set(0, 1 + a, sigma[a]);
    if (site > 0) {
      const Eigen::Matrix3d& c = eff.bonds[static_cast<std::size_t>(site - 1)];
      for (int a = 0; a < 3; ++a) {
        Eigen::Matrix2cd close = Eigen::Matrix2cd::Zero();
        for (int b = 0; b < 3; ++b) close += c(a, b) * sigma[b];
        set(1 + a, kDone, close);
      }
    }
    const Eigen::Vector3d& field = eff.fields[static_cast<std::size_t>(site)];
    if (field.squaredNorm() > 0) {
      Eigen::Matrix2cd h = Eigen::Matrix2cd::Zero();
      for (int a = 0; a < 3; ++a) h += field(a) * sigma[a];
      set(0, kDone, h);
    }
    mpo.sites.push_back(std::move(w));
  }
  return mpo;
}

Matrix contract_mpo(const MatrixProductOperator& mpo) {
  const int n = mpo.n_sites();
  if (n > 12) throw ResourceError("MPO contraction limited to N <= 12");
  // ops[b] acts on sites 0..i; site i is the most significant bit so far.
  std::vector<Matrix> ops(1, Matrix::Ones(1, 1));
  for (int i = 0; i < n; ++i) {
    const MpoSite& w = mpo.sites[static_cast<std::size_t>(i)];
    const Eigen::Index d = ops[0].rows();
    std::vector<Matrix> next(static_cast<std::size_t>(w.right_dim), Matrix::Zero(2 * d, 2 * d));
    for (int a = 0; a < w.left_dim; ++a)
      for (int b = 0; b < w.right_dim; ++b) {
        if (!w.has(a, b)) continue;
        const Eigen::Matrix2cd& op = w.at(a, b);
        for (int so = 0; so < 2; ++so)
          for (int si = 0; si < 2; ++si)
            if (op(so, si) != Complex(0)) next[b].block(so * d, si * d, d, d) += op(so, si) * ops[a];
      }
    ops = std::move(next);
  }
  return ops[0];
}

MatrixProductState random_mps(int n_sites, int chi, std::uint64_t seed, std::uint64_t stream) {
  if (n_sites < 1 || chi < 1) throw DomainError("random MPS needs N >= 1 and chi >= 1");
  CounterRng rng(seed, stream, rng_tag::solver + 0x2000);
  MatrixProductState mps;
  auto dim_at = [&](int bond) {  // bond between sites bond-1 and bond
    const int exact = std::min(bond, n_sites - bond);
    return exact >= 20 ? chi : std::min(chi, 1 << exact);
  };
  for (int i = 0; i < n_sites; ++i) {
    const int dl = dim_at(i);
    const int dr = dim_at(i + 1);
    SiteTensor t;
    for (int s = 0; s < 2; ++s) {
      t[s].resize(dl, dr);
      for (Eigen::Index c = 0; c < dr; ++c)
        for (Eigen::Index r = 0; r < dl; ++r) {
          const double re = rng.normal();
          const double im = rng.normal();
          t[s](r, c) = Complex(re, im);
        }
    }
    mps.tensors.push_back(std::move(t));
  }
  return mps;
}

MatrixProductState product_mps(const std::vector<Eigen::Vector2cd>& local_states) {
  MatrixProductState mps;
  for (const auto& v : local_states) {
    SiteTensor t;
    for (int s = 0; s < 2; ++s) {
      t[s].resize(1, 1);
      t[s](0, 0) = v(s);
    }
    mps.tensors.push_back(std::move(t));
  }
  return mps;
}

SpinState to_state_vector(const MatrixProductState& mps) {
  const int n = mps.n_sites();
  if (n > 24) throw ResourceError("state-vector expansion limited to N <= 24");
  Matrix psi = Matrix::Ones(1, 1);
  for (int i = 0; i < n; ++i) {
    const SiteTensor& a = mps.tensors[static_cast<std::size_t>(i)];
    Matrix next(2 * psi.rows(), a[0].cols());
    next.topRows(psi.rows()) = psi * a[0];
    next.bottomRows(psi.rows()) = psi * a[1];
    psi = std::move(next);
  }
  return SpinState{Vector(Eigen::Map<const Vector>(psi.data(), psi.rows())), n};
}

Complex overlap(const MatrixProductState& a, const MatrixProductState& b) {
  if (a.n_sites() != b.n_sites()) throw ShapeError("MPS lengths differ");
  Matrix e = Matrix::Ones(1, 1);
  for (int i = 0; i < a.n_sites(); ++i) {
    const auto& ta = a.tensors[static_cast<std::size_t>(i)];
    const auto& tb = b.tensors[static_cast<std::size_t>(i)];
    e = ta[0].adjoint() * e * tb[0] + ta[1].adjoint() * e * tb[1];
  }
  return e(0, 0);
}

namespace {

Env extend_left(const Env& left, const SiteTensor& a, const MpoSite& w) {
  const Eigen::Index d = a[0].cols();
  Env out(static_cast<std::size_t>(w.right_dim), Matrix::Zero(d, d));
  std::vector<std::array<Matrix, 2>> la(static_cast<std::size_t>(w.left_dim));
  for (int x = 0; x < w.left_dim; ++x)
    for (int s = 0; s < 2; ++s) la[x][s] = left[x] * a[s];
  for (int b = 0; b < w.right_dim; ++b)
    for (int so = 0; so < 2; ++so) {
      Matrix acc = Matrix::Zero(a[0].rows(), d);
      bool any = false;
      for (int x = 0; x < w.left_dim; ++x) {
        if (!w.has(x, b)) continue;
        for (int si = 0; si < 2; ++si) {
          const Complex c = w.at(x, b)(so, si);
          if (c == Complex(0)) continue;
          acc += c * la[x][si];
          any = true;
        }
      }
      if (any) out[b].noalias() += a[so].adjoint() * acc;
    }
  return out;
}

Env extend_right(const Env& right, const SiteTensor& a, const MpoSite& w) {
  const Eigen::Index d = a[0].rows();
  Env out(static_cast<std::size_t>(w.left_dim), Matrix::Zero(d, d));
  std::vector<std::array<Matrix, 2>> ra(static_cast<std::size_t>(w.right_dim));
  for (int y = 0; y < w.right_dim; ++y)
    for (int s = 0; s < 2; ++s) ra[y][s] = right[y] * a[s].transpose();
  for (int x = 0; x < w.left_dim; ++x)
    for (int so = 0; so < 2; ++so) {
      Matrix acc = Matrix::Zero(a[0].cols(), d);
      bool any = false;
      for (int y = 0; y < w.right_dim; ++y) {
        if (!w.has(x, y)) continue;
        for (int si = 0; si < 2; ++si) {
          const Complex c = w.at(x, y)(so, si);
          if (c == Complex(0)) continue;
          acc += c * ra[y][si];
          any = true;
        }
      }
      if (any) out[x].noalias() += a[so].conjugate() * acc;
    }
  return out;
}

Matrix overlap_left(const Matrix& left, const SiteTensor& cur, const SiteTensor& ref) {
  return cur[0].adjoint() * left * ref[0] + cur[1].adjoint() * left * ref[1];
}

Matrix overlap_right(const Matrix& right, const SiteTensor& cur, const SiteTensor& ref) {
  return cur[0].conjugate() * right * ref[0].transpose() + cur[1].conjugate() * right * ref[1].transpose();
}

/// Two-site effective Hamiltonian on theta stored as four (s1 + 2 s2)
/// column-major dl x dr blocks.
class TwoSiteOperator {
 public:
  TwoSiteOperator(const Env& left, const MpoSite& w1, const MpoSite& w2, const Env& right)
      : left_(left), w1_(w1), w2_(w2), dl_(left[0].rows()), dr_(right[0].rows()) {
    right_t_.reserve(right.size());
    for (const Matrix& r : right) right_t_.push_back(r.transpose());
  }

  Eigen::Index dimension() const { return 4 * dl_ * dr_; }

  void apply(const Vector& x, Vector& y) const {
    const Eigen::Index blk = dl_ * dr_;
    auto theta = [&](int s1, int s2) {
      return Eigen::Map<const Matrix>(x.data() + (s1 + 2 * s2) * blk, dl_, dr_);
    };
    // t1[c][s1 + 2 s2] = theta R_c^T
    std::vector<std::array<Matrix, 4>> t1(static_cast<std::size_t>(w2_.right_dim));
    for (int c = 0; c < w2_.right_dim; ++c)
      for (int s = 0; s < 4; ++s) t1[c][s].noalias() = theta(s & 1, s >> 1) * right_t_[c];
    // t2[b][s1 + 2 t2]
    std::vector<std::array<Matrix, 4>> t2(static_cast<std::size_t>(w2_.left_dim));
    std::vector<bool> t2_used(static_cast<std::size_t>(w2_.left_dim), false);
    for (int b = 0; b < w2_.left_dim; ++b)
      for (int c = 0; c < w2_.right_dim; ++c) {
        if (!w2_.has(b, c)) continue;
        const Eigen::Matrix2cd& op = w2_.at(b, c);
        if (!t2_used[b]) {
          for (auto& m : t2[b]) m = Matrix::Zero(dl_, dr_);
          t2_used[b] = true;
        }
        for (int to = 0; to < 2; ++to)
          for (int si = 0; si < 2; ++si) {
            if (op(to, si) == Complex(0)) continue;
            for (int s1 = 0; s1 < 2; ++s1) t2[b][s1 + 2 * to] += op(to, si) * t1[c][s1 + 2 * si];
          }
      }
    // t3[a][t1 + 2 t2]
    y.setZero(dimension());
    for (int a = 0; a < w1_.left_dim; ++a) {
      std::array<Matrix, 4> t3;
      bool any = false;
      for (int b = 0; b < w1_.right_dim; ++b) {
        if (!w1_.has(a, b) || !t2_used[b]) continue;
        const Eigen::Matrix2cd& op = w1_.at(a, b);
        if (!any) {
          for (auto& m : t3) m = Matrix::Zero(dl_, dr_);
          any = true;
        }
        for (int to = 0; to < 2; ++to)
          for (int si = 0; si < 2; ++si) {
            if (op(to, si) == Complex(0)) continue;
            for (int s2 = 0; s2 < 2; ++s2) t3[to + 2 * s2] += op(to, si) * t2[b][si + 2 * s2];
          }
      }
      if (!any) continue;
      for (int s = 0; s < 4; ++s) {
        Eigen::Map<Matrix> out(y.data() + s * blk, dl_, dr_);
        out.noalias() += left_[a] * t3[s];
      }
    }
  }

 private:
  const Env& left_;
  const MpoSite& w1_;
  const MpoSite& w2_;
  std::vector<Matrix> right_t_;
  Eigen::Index dl_, dr_;
};

Vector pack_two_site(const SiteTensor& a, const SiteTensor& b) {
  const Eigen::Index dl = a[0].rows(), dr = b[0].cols(), blk = dl * dr;
  Vector v(4 * blk);
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2) {
      Eigen::Map<Matrix> out(v.data() + (s1 + 2 * s2) * blk, dl, dr);
      out.noalias() = a[s1] * b[s2];
    }
  return v;
}

struct SplitResult {
  double discarded = 0.0;
  int kept = 0;
  std::vector<double> spectrum;
};

/// Splits theta into site tensors; `move_right` leaves the left tensor
/// left-orthonormal and the weights on the right, otherwise the reverse.
SplitResult split_two_site(const Vector& theta, Eigen::Index dl, Eigen::Index dr, int chi_max,
                           double truncation_weight, bool move_right, SiteTensor& left, SiteTensor& right) {
  const Eigen::Index blk = dl * dr;
  Matrix m(2 * dl, 2 * dr);
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2)
      m.block(s1 * dl, s2 * dr, dl, dr) = Eigen::Map<const Matrix>(theta.data() + (s1 + 2 * s2) * blk, dl, dr);
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double total = s.squaredNorm();
  Eigen::Index keep = s.size();
  double tail = 0.0;
  while (keep > 1 && (tail + s(keep - 1) * s(keep - 1)) / total < truncation_weight) {
    tail += s(keep - 1) * s(keep - 1);
    --keep;
  }
  keep = std::min<Eigen::Index>(keep, chi_max);
  SplitResult out;
  out.kept = static_cast<int>(keep);
  out.discarded = 1.0 - s.head(keep).squaredNorm() / total;
  Eigen::VectorXd sk = s.head(keep) / std::sqrt(s.head(keep).squaredNorm());
  for (Eigen::Index i = 0; i < keep; ++i) out.spectrum.push_back(sk(i) * sk(i));

  const Matrix u = svd.matrixU().leftCols(keep);
  const Matrix vh = svd.matrixV().leftCols(keep).adjoint();
  for (int s1 = 0; s1 < 2; ++s1) {
    if (move_right)
      left[s1] = u.block(s1 * dl, 0, dl, keep);
    else
      left[s1] = u.block(s1 * dl, 0, dl, keep) * sk.asDiagonal();
  }
  for (int s2 = 0; s2 < 2; ++s2) {
    if (move_right)
      right[s2] = sk.asDiagonal() * vh.block(0, s2 * dr, keep, dr);
    else
      right[s2] = vh.block(0, s2 * dr, keep, dr);
  }
  return out;
}

/// Right-orthonormalizes sites n-1..1 and normalizes the state; center at 0.
void right_canonicalize(MatrixProductState& mps) {
  for (int i = mps.n_sites() - 1; i >= 1; --i) {
    SiteTensor& t = mps.tensors[static_cast<std::size_t>(i)];
    const Eigen::Index dl = t[0].rows(), dr = t[0].cols();
    Matrix m(dl, 2 * dr);
    m << t[0], t[1];
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Index k = svd.singularValues().size();
    const Matrix vh = svd.matrixV().adjoint();
    t[0] = vh.leftCols(dr);
    t[1] = vh.rightCols(dr);
    const Matrix carry = svd.matrixU() * svd.singularValues().asDiagonal();
    SiteTensor& prev = mps.tensors[static_cast<std::size_t>(i - 1)];
    for (int s = 0; s < 2; ++s) prev[s] = prev[s] * carry.leftCols(k);
  }
  SiteTensor& first = mps.tensors[0];
  const double nrm = std::sqrt(first[0].squaredNorm() + first[1].squaredNorm());
  first[0] /= nrm;
  first[1] /= nrm;
  mps.canonical_center = 0;
}

/// Left-orthonormalizes sites 0..cut-1, right-orthonormalizes cut+1..n-1;
/// returns the center tensor at `cut` as a dl x 2dr matrix.
Matrix center_at(MatrixProductState mps, int cut) {
  const int n = mps.n_sites();
  for (int i = 0; i < cut; ++i) {
    SiteTensor& t = mps.tensors[static_cast<std::size_t>(i)];
    const Eigen::Index dl = t[0].rows(), dr = t[0].cols();
    Matrix m(2 * dl, dr);
    m << t[0], t[1];
    Eigen::HouseholderQR<Matrix> qr(m);
    const Eigen::Index k = std::min(2 * dl, dr);
    const Matrix q = qr.householderQ() * Matrix::Identity(2 * dl, k);
    const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    t[0] = q.topRows(dl);
    t[1] = q.bottomRows(dl);
    SiteTensor& next = mps.tensors[static_cast<std::size_t>(i + 1)];
    for (int s = 0; s < 2; ++s) next[s] = r * next[s];
  }
  for (int i = n - 1; i > cut; --i) {
    SiteTensor& t = mps.tensors[static_cast<std::size_t>(i)];
    const Eigen::Index dl = t[0].rows(), dr = t[0].cols();
    Matrix m(dl, 2 * dr);
    m << t[0], t[1];
    Eigen::HouseholderQR<Matrix> qr(m.adjoint());
    const Eigen::Index k = std::min(dl, 2 * dr);
    const Matrix q = qr.householderQ() * Matrix::Identity(2 * dr, k);
    const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const Matrix qh = q.adjoint();
    t[0] = qh.leftCols(dr);
    t[1] = qh.rightCols(dr);
    SiteTensor& prev = mps.tensors[static_cast<std::size_t>(i - 1)];
    for (int s = 0; s < 2; ++s) prev[s] = prev[s] * r.adjoint();
  }
  const SiteTensor& c = mps.tensors[static_cast<std::size_t>(cut)];
  Matrix m(c[0].rows(), 2 * c[0].cols());
  m << c[0], c[1];
  return m;
}

class Sweeper {
 public:
  Sweeper(const MatrixProductOperator& mpo, MatrixProductState psi, const DmrgOptions& options,
          const MatrixProductState* ground, double penalty)
      : mpo_(mpo), psi_(std::move(psi)), options_(options), ground_(ground), penalty_(penalty) {
    const int n = mpo_.n_sites();
    right_canonicalize(psi_);
    left_.assign(static_cast<std::size_t>(n + 1), Env{});
    right_.assign(static_cast<std::size_t>(n + 1), Env{});
    left_[0] = Env{Matrix::Ones(1, 1)};
    right_[n] = Env{Matrix::Ones(1, 1)};
    for (int i = n - 1; i >= 1; --i) right_[i] = extend_right(right_[i + 1], psi_.tensors[i], mpo_.sites[i]);
    if (ground_) {
      ref_ = *ground_;
      const double nrm = std::sqrt(std::abs(overlap(ref_, ref_)));
      ref_.tensors[0][0] /= nrm;
      ref_.tensors[0][1] /= nrm;
      left_ov_.assign(static_cast<std::size_t>(n + 1), Matrix{});
      right_ov_.assign(static_cast<std::size_t>(n + 1), Matrix{});
      left_ov_[0] = Matrix::Ones(1, 1);
      right_ov_[n] = Matrix::Ones(1, 1);
      for (int i = n - 1; i >= 1; --i)
        right_ov_[i] = overlap_right(right_ov_[i + 1], psi_.tensors[i], ref_.tensors[i]);
    }
  }

  DmrgResult run() {
    const int n = mpo_.n_sites();
    DmrgResult result;
    DmrgDiagnostics& diag = result.diagnostics;
    diag.penalty_weight = penalty_;
    const int chi_start = std::min(options_.chi_max, std::max(1, options_.chi_initial));
    std::optional<double> previous;
    double objective = 0.0;
    for (int sweep = 0; sweep < options_.max_sweeps; ++sweep) {
      const long ramp = static_cast<long>(chi_start) << std::min(sweep, 20);
      const int chi = static_cast<int>(std::min<long>(options_.chi_max, ramp));
      diag.chi_schedule.push_back(chi);
      if (n == 1) break;
      for (int i = 0; i <= n - 2; ++i) objective = step(i, true, chi, diag);
      diag.half_sweep_energies.push_back(objective);
      for (int i = n - 2; i >= 0; --i) objective = step(i, false, chi, diag);
      diag.half_sweep_energies.push_back(objective);
      diag.sweeps = sweep + 1;
      if (previous && chi == options_.chi_max && std::abs(objective - *previous) < options_.energy_tol) {
        diag.converged = true;
        break;
      }
      previous = objective;
    }
    diag.warning = !diag.converged;
    psi_.canonical_center = 0;
    result.energy = expectation(psi_, mpo_);
    if (ground_) diag.ground_overlap = std::abs(overlap(ref_, psi_)) / std::sqrt(std::abs(overlap(psi_, psi_)));
    result.mps = std::move(psi_);
    return result;
  }

 private:
  double step(int i, bool move_right, int chi, DmrgDiagnostics& diag) {
    SiteTensor& a = psi_.tensors[static_cast<std::size_t>(i)];
    SiteTensor& b = psi_.tensors[static_cast<std::size_t>(i + 1)];
    const Eigen::Index dl = a[0].rows(), dr = b[0].cols();
    TwoSiteOperator heff(left_[i], mpo_.sites[i], mpo_.sites[i + 1], right_[i + 2]);

    Vector phi;
    if (ground_) {
      const SiteTensor& ga = ref_.tensors[static_cast<std::size_t>(i)];
      const SiteTensor& gb = ref_.tensors[static_cast<std::size_t>(i + 1)];
      phi.resize(heff.dimension());
      const Eigen::Index blk = dl * dr;
      for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2) {
          Eigen::Map<Matrix> out(phi.data() + (s1 + 2 * s2) * blk, dl, dr);
          out.noalias() = left_ov_[i] * ga[s1] * gb[s2] * right_ov_[i + 2].transpose();
        }
    }
    const double weight = penalty_;
    const LinearOperator op = [&](const Vector& x, Vector& y) {
      heff.apply(x, y);
      if (weight > 0 && phi.size() > 0) y += (weight * phi.dot(x)) * phi;
    };
    Vector start = pack_two_site(a, b);
    KrylovResult eig = lanczos_lowest(op, heff.dimension(), 1, 1, start, {}, options_.local);
    const Vector& theta = eig.vectors[0];

    const SplitResult split =
        split_two_site(theta, dl, dr, chi, options_.truncation_weight, move_right, a, b);
    diag.max_discarded_weight = std::max(diag.max_discarded_weight, split.discarded);

    if (move_right) {
      left_[i + 1] = extend_left(left_[i], a, mpo_.sites[i]);
      if (ground_) left_ov_[i + 1] = overlap_left(left_ov_[i], a, ref_.tensors[i]);
      psi_.canonical_center = i + 1;
    } else {
      right_[i + 1] = extend_right(right_[i + 2], b, mpo_.sites[i + 1]);
      if (ground_) right_ov_[i + 1] = overlap_right(right_ov_[i + 2], b, ref_.tensors[i + 1]);
      psi_.canonical_center = i;
    }
    return eig.values[0];
  }

  const MatrixProductOperator& mpo_;
  MatrixProductState psi_;
  DmrgOptions options_;
  const MatrixProductState* ground_;
  MatrixProductState ref_;
  double penalty_;
  std::vector<Env> left_, right_;
  std::vector<Matrix> left_ov_, right_ov_;
};

}  // namespace

double expectation(const MatrixProductState& psi, const MatrixProductOperator& mpo) {
  if (psi.n_sites() != mpo.n_sites()) throw ShapeError("MPS and MPO lengths differ");
  Env env{Matrix::Ones(1, 1)};
  for (int i = 0; i < psi.n_sites(); ++i) env = extend_left(env, psi.tensors[i], mpo.sites[i]);
  return env[0](0, 0).real() / overlap(psi, psi).real();
}

DmrgResult dmrg_ground(const MatrixProductOperator& mpo, const DmrgOptions& options) {
  if (options.chi_max < 1) throw DomainError("chi_max must be positive");
  const int chi0 = std::min(options.chi_max, std::max(1, options.chi_initial));
  MatrixProductState init = random_mps(mpo.n_sites(), chi0, mpo.seed, mpo.realization_index);
  return Sweeper(mpo, std::move(init), options, nullptr, 0.0).run();
}

DmrgResult dmrg_ground(const MatrixProductOperator& mpo, int chi_max, int sweeps, double energy_tol) {
  DmrgOptions o;
  o.chi_max = chi_max;
  o.chi_initial = std::min(8, chi_max);
  o.max_sweeps = sweeps;
  o.energy_tol = energy_tol;
  return dmrg_ground(mpo, o);
}

double default_penalty_weight(const MatrixProductOperator& mpo) { return 10.0 * 2.0 * mpo.norm_bound; }

DmrgResult dmrg_first_excited(const MatrixProductOperator& mpo, const MatrixProductState& ground,
                              double penalty_weight, const DmrgOptions& options) {
  if (ground.n_sites() != mpo.n_sites()) throw ShapeError("ground MPS and MPO lengths differ");
  if (!(penalty_weight > 0)) throw DomainError("penalty weight must be positive");
  const int chi0 = std::min(options.chi_max, std::max(1, options.chi_initial));
  MatrixProductState init = random_mps(mpo.n_sites(), chi0, mpo.seed, mpo.realization_index + (1ull << 40));
  DmrgResult r = Sweeper(mpo, std::move(init), options, &ground, penalty_weight).run();
  if (!(r.diagnostics.ground_overlap < 1e-6))
    throw ExcitedStateFailure("excited state overlaps the ground state: |<g|psi>| = " +
                              std::to_string(r.diagnostics.ground_overlap));
  return r;
}

EntropyResult mps_entropy(const MatrixProductState& mps, int cut) {
  const int n = mps.n_sites();
  if (cut < 1 || cut > n - 1) throw DomainError("cut must lie in [1, N-1]");
  const Matrix c = center_at(mps, cut);
  Eigen::BDCSVD<Matrix> svd(c);
  const Eigen::VectorXd s = svd.singularValues();
  EntropyResult r;
  r.cut_position = cut;
  const double total = s.squaredNorm();
  for (Eigen::Index i = 0; i < s.size(); ++i) r.schmidt_spectrum.push_back(s(i) * s(i) / total);
  std::sort(r.schmidt_spectrum.begin(), r.schmidt_spectrum.end(), std::greater<>());
  r.entropy_bits = entropy_from_spectrum(r.schmidt_spectrum);
  return r;
}

double mps_correlation(const MatrixProductState& mps, int j, int k, SpinNormalization normalization) {
  const int n = mps.n_sites();
  if (j == k) throw DomainError("correlation needs distinct sites");
  if (j < 1 || j > n || k < 1 || k > n) throw DomainError("site outside [1, N]");
  const double scale = spin_scale(normalization);
  auto expect = [&](int site_a, const Eigen::Matrix2cd* op_a, int site_b, const Eigen::Matrix2cd* op_b) {
    Matrix e = Matrix::Ones(1, 1);
    for (int i = 0; i < n; ++i) {
      const SiteTensor& t = mps.tensors[static_cast<std::size_t>(i)];
      const Eigen::Matrix2cd* op = (i + 1 == site_a) ? op_a : (i + 1 == site_b) ? op_b : nullptr;
      Matrix next = Matrix::Zero(t[0].cols(), t[0].cols());
      for (int so = 0; so < 2; ++so)
        for (int si = 0; si < 2; ++si) {
          const Complex c = op ? (*op)(so, si) : Complex(so == si ? 1.0 : 0.0);
          if (c == Complex(0)) continue;
          next.noalias() += c * (t[so].adjoint() * e * t[si]);
        }
      e = std::move(next);
    }
    return e(0, 0);
  };
  const double nrm = expect(0, nullptr, 0, nullptr).real();
  std::array<Eigen::Matrix2cd, 3> sigma;
  for (int a = 0; a < 3; ++a) sigma[a] = spin_matrix(a, scale);
  std::array<Complex, 3> at_j, at_k;
  for (int a = 0; a < 3; ++a) {
    at_j[a] = expect(j, &sigma[a], 0, nullptr) / nrm;
    at_k[a] = expect(k, &sigma[a], 0, nullptr) / nrm;
  }
  double acc = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const Complex joint = expect(j, &sigma[a], k, &sigma[b]) / nrm;
      acc += std::norm(joint - at_j[a] * at_k[b]);
    }
  return acc / 9.0;
}

}  // namespace tsre
