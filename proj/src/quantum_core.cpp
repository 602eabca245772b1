#include "qot/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

namespace qot {

namespace {

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

ComplexMatrix gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = Complex(re, im);
    }
  return g;
}

// Q factor of a QR decomposition with the phases of diag(R) absorbed, which
// makes the result Haar distributed for Gaussian input.
ComplexMatrix phase_fixed_q(const ComplexMatrix& g) {
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(g.rows(), g.cols());
  const ComplexMatrix r = qr.matrixQR();
  ComplexMatrix out = q;
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    const double mag = std::abs(r(j, j));
    const Complex phase = mag > 0.0 ? r(j, j) / mag : Complex(1.0, 0.0);
    out.col(j) *= phase;
  }
  return out;
}

void check_sites(std::span<const int> dims, std::span<const int> sites, const char* what) {
  if (dims.empty()) throw DimensionError(std::string(what) + ": empty dims");
  for (int d : dims)
    if (d < 1) throw DimensionError(std::string(what) + ": subsystem dims must be >= 1");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i] < 0 || sites[i] >= static_cast<int>(dims.size()))
      throw DimensionError(std::string(what) + ": subsystem index out of range");
    if (i > 0 && sites[i] <= sites[i - 1])
      throw DimensionError(std::string(what) + ": subsystem indices must be strictly increasing");
  }
}

int dims_product(std::span<const int> dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

}  // namespace

// ---------------------------------------------------------------------------
// HermitianOperator

HermitianOperator::HermitianOperator(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionError("HermitianOperator: matrix must be square and nonempty");
  if (!all_finite(m)) throw InvariantError("HermitianOperator: non-finite entry");
  const double anti = (m - m.adjoint()).cwiseAbs().maxCoeff() / 2.0;
  if (anti > kHermitianRejectTol)
    throw InvariantError("HermitianOperator: anti-Hermitian part " + std::to_string(anti) +
                         " exceeds tolerance");
  m_ = (m + m.adjoint()) / 2.0;
}

HermitianOperator HermitianOperator::zero(int dim) {
  return HermitianOperator(ComplexMatrix::Zero(dim, dim));
}

HermitianOperator HermitianOperator::identity(int dim) {
  return HermitianOperator(ComplexMatrix::Identity(dim, dim));
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& o) const {
  if (o.dim() != dim()) throw DimensionError("HermitianOperator: dimension mismatch in +");
  return HermitianOperator(ComplexMatrix(m_ + o.m_));
}

HermitianOperator HermitianOperator::operator-(const HermitianOperator& o) const {
  if (o.dim() != dim()) throw DimensionError("HermitianOperator: dimension mismatch in -");
  return HermitianOperator(ComplexMatrix(m_ - o.m_));
}

HermitianOperator HermitianOperator::operator*(double s) const {
  return HermitianOperator(ComplexMatrix(m_ * s));
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(const HermitianOperator& op) : op_(op) {
  const double tr = op.matrix().trace().real();
  if (std::abs(tr - 1.0) > kDensityTraceTol)
    throw InvariantError("DensityMatrix: trace " + std::to_string(tr) + " differs from 1");
  const double lo = min_eigenvalue(op);
  if (lo < -kDensityEigTol)
    throw InvariantError("DensityMatrix: negative eigenvalue " + std::to_string(lo));
}

DensityMatrix DensityMatrix::project(const HermitianOperator& op, double tol) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(op.matrix());
  const double tr = op.matrix().trace().real();
  if (std::abs(tr - 1.0) > tol)
    throw InvariantError("density: trace " + std::to_string(tr) + " differs from 1");
  if (es.eigenvalues().minCoeff() < -tol)
    throw InvariantError("density: negative eigenvalue " +
                         std::to_string(es.eigenvalues().minCoeff()));
  Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0);
  w /= w.sum();
  const ComplexMatrix m = es.eigenvectors() * w.cast<Complex>().asDiagonal() *
                          es.eigenvectors().adjoint();
  return DensityMatrix(HermitianOperator(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(HermitianOperator(ComplexMatrix::Identity(dim, dim) / double(dim)));
}

DensityMatrix DensityMatrix::basis_state(int dim, int index) {
  if (index < 0 || index >= dim) throw DimensionError("basis_state: index out of range");
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m(index, index) = 1.0;
  return DensityMatrix(HermitianOperator(m));
}

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(const ComplexVector& v) {
  if (v.size() == 0) throw DimensionError("PureState: empty vector");
  if (std::abs(v.norm() - 1.0) > kPureNormTol)
    throw InvariantError("PureState: vector norm " + std::to_string(v.norm()) + " is not 1");
  v_ = v;
}

PureState PureState::normalized(const ComplexVector& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvariantError("PureState: cannot normalize");
  return PureState(ComplexVector(v / n));
}

DensityMatrix PureState::projector() const {
  return DensityMatrix(HermitianOperator(ComplexMatrix(v_ * v_.adjoint())));
}

// ---------------------------------------------------------------------------
// KrausChannel

KrausChannel::KrausChannel(int dim_in, int dim_out, std::vector<ComplexMatrix> kraus_ops)
    : dim_in_(dim_in), dim_out_(dim_out), ops_(std::move(kraus_ops)) {
  if (dim_in < 1 || dim_out < 1) throw DimensionError("KrausChannel: dims must be >= 1");
  if (ops_.empty()) throw DimensionError("KrausChannel: no Kraus operators");
  ComplexMatrix sum = ComplexMatrix::Zero(dim_in, dim_in);
  for (const auto& k : ops_) {
    if (k.rows() != dim_out || k.cols() != dim_in)
      throw DimensionError("KrausChannel: Kraus operator must be dim_out x dim_in");
    sum += k.adjoint() * k;
  }
  const double err = max_abs_diff(sum, ComplexMatrix::Identity(dim_in, dim_in));
  if (err > kKrausTol)
    throw InvariantError("KrausChannel: sum K^dagger K deviates from identity by " +
                         std::to_string(err));
}

KrausChannel KrausChannel::identity(int dim) {
  return KrausChannel(dim, dim, {ComplexMatrix::Identity(dim, dim)});
}

KrausChannel KrausChannel::completely_depolarizing(int dim_in, int dim_out) {
  // K_{ij} = |i><j| / sqrt(dim_out)
  std::vector<ComplexMatrix> ops;
  const double s = 1.0 / std::sqrt(double(dim_out));
  for (int i = 0; i < dim_out; ++i)
    for (int j = 0; j < dim_in; ++j) {
      ComplexMatrix k = ComplexMatrix::Zero(dim_out, dim_in);
      k(i, j) = s;
      ops.push_back(std::move(k));
    }
  return KrausChannel(dim_in, dim_out, std::move(ops));
}

KrausChannel KrausChannel::partial_trace(int d0, int d1, int traced) {
  if (traced != 0 && traced != 1) throw DimensionError("partial_trace channel: traced must be 0 or 1");
  const int kept = traced == 0 ? d1 : d0;
  const int gone = traced == 0 ? d0 : d1;
  std::vector<ComplexMatrix> ops;
  for (int t = 0; t < gone; ++t) {
    ComplexMatrix k = ComplexMatrix::Zero(kept, d0 * d1);
    for (int i = 0; i < kept; ++i) k(i, traced == 0 ? t * d1 + i : i * d1 + t) = 1.0;
    ops.push_back(std::move(k));
  }
  return KrausChannel(d0 * d1, kept, std::move(ops));
}

// ---------------------------------------------------------------------------
// SubsystemSplit

SubsystemSplit::SubsystemSplit(std::vector<int> dims, std::vector<int> kept) {
  check_sites(dims, kept, "SubsystemSplit");
  const int n = static_cast<int>(dims.size());
  std::vector<int> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];
  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (std::find(kept.begin(), kept.end(), i) == kept.end()) rest.push_back(i);

  total_ = dims_product(dims);
  kept_dim_ = 1;
  for (int s : kept) kept_dim_ *= dims[s];
  rest_dim_ = total_ / kept_dim_;

  // Offset contributed by a row-major multi-index over a subset of sites.
  auto offsets = [&](const std::vector<int>& sites, int count) {
    std::vector<int> out(count, 0);
    for (int idx = 0; idx < count; ++idx) {
      int rem = idx;
      int off = 0;
      for (int s = static_cast<int>(sites.size()) - 1; s >= 0; --s) {
        const int site = sites[s];
        off += (rem % dims[site]) * stride[site];
        rem /= dims[site];
      }
      out[idx] = off;
    }
    return out;
  };
  const auto kept_off = offsets(kept, kept_dim_);
  const auto rest_off = offsets(rest, rest_dim_);
  table_.resize(static_cast<std::size_t>(kept_dim_) * rest_dim_);
  for (int k = 0; k < kept_dim_; ++k)
    for (int t = 0; t < rest_dim_; ++t)
      table_[static_cast<std::size_t>(k) * rest_dim_ + t] = kept_off[k] + rest_off[t];
}

// ---------------------------------------------------------------------------
// Operations

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(tensor(a.matrix(), b.matrix()));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::project(tensor(a.op(), b.op()), kDensityTraceTol);
}

HermitianOperator flip_operator(int d) {
  if (d < 1) throw DimensionError("flip_operator: d must be >= 1");
  ComplexMatrix f = ComplexMatrix::Zero(d * d, d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) f(b * d + a, a * d + b) = 1.0;
  return HermitianOperator(f);
}

HermitianOperator proj_sym(int d) {
  const ComplexMatrix f = flip_operator(d).matrix();
  return HermitianOperator(ComplexMatrix((ComplexMatrix::Identity(d * d, d * d) + f) / 2.0));
}

HermitianOperator proj_asym(int d) {
  const ComplexMatrix f = flip_operator(d).matrix();
  return HermitianOperator(ComplexMatrix((ComplexMatrix::Identity(d * d, d * d) - f) / 2.0));
}

HermitianOperator proj_asym_reshuffled(int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw DimensionError("proj_asym_reshuffled: dims must be >= 1");
  const int n = d1 * d1 * d2 * d2;
  const ComplexMatrix ff = tensor(flip_operator(d1).matrix(), flip_operator(d2).matrix());
  return HermitianOperator(ComplexMatrix((ComplexMatrix::Identity(n, n) - ff) / 2.0));
}

ComplexMatrix partial_trace(const ComplexMatrix& x, std::span<const int> dims,
                            std::span<const int> keep) {
  check_sites(dims, keep, "partial_trace");
  if (x.rows() != x.cols() || x.rows() != dims_product(dims))
    throw DimensionError("partial_trace: dims do not factor the matrix size");
  if (keep.empty()) {
    ComplexMatrix out(1, 1);
    out(0, 0) = x.trace();
    return out;
  }
  const SubsystemSplit split({dims.begin(), dims.end()}, {keep.begin(), keep.end()});
  const int k = split.kept_dim();
  ComplexMatrix out = ComplexMatrix::Zero(k, k);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) {
      Complex acc = 0.0;
      for (int t = 0; t < split.rest_dim(); ++t)
        acc += x(split.full_index(r, t), split.full_index(c, t));
      out(r, c) = acc;
    }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& x, std::span<const int> dims,
                            std::span<const int> keep) {
  return DensityMatrix::project(HermitianOperator(partial_trace(x.matrix(), dims, keep)),
                                kDensityTraceTol);
}

ComplexMatrix lift_operator(const ComplexMatrix& op, std::span<const int> dims,
                            std::span<const int> sites) {
  check_sites(dims, sites, "lift_operator");
  const SubsystemSplit split({dims.begin(), dims.end()}, {sites.begin(), sites.end()});
  if (op.rows() != split.kept_dim() || op.cols() != split.kept_dim())
    throw DimensionError("lift_operator: operator size does not match the chosen subsystems");
  ComplexMatrix out = ComplexMatrix::Zero(split.total_dim(), split.total_dim());
  for (int r = 0; r < split.kept_dim(); ++r)
    for (int c = 0; c < split.kept_dim(); ++c) {
      if (op(r, c) == Complex(0.0)) continue;
      for (int t = 0; t < split.rest_dim(); ++t)
        out(split.full_index(r, t), split.full_index(c, t)) = op(r, c);
    }
  return out;
}

HermitianOperator twirl(const HermitianOperator& x) {
  const int n = x.dim();
  const int d = static_cast<int>(std::lround(std::sqrt(double(n))));
  if (d * d != n) throw DimensionError("twirl: dimension " + std::to_string(n) + " is not a square");
  const HermitianOperator ps = proj_sym(d);
  const HermitianOperator pa = proj_asym(d);
  const double ws = trace_product(x, ps) / (d * (d + 1) / 2.0);
  HermitianOperator out = ps * ws;
  if (d > 1) out = out + pa * (trace_product(x, pa) / (d * (d - 1) / 2.0));
  return out;
}

DensityMatrix apply_channel(const KrausChannel& channel, const DensityMatrix& rho) {
  if (channel.dim_in() != rho.dim())
    throw DimensionError("apply_channel: channel input dim does not match state dim");
  ComplexMatrix out = ComplexMatrix::Zero(channel.dim_out(), channel.dim_out());
  for (const auto& k : channel.kraus_ops()) out += k * rho.matrix() * k.adjoint();
  return DensityMatrix::project(HermitianOperator(out), 1e-9);
}

DensityMatrix conjugate(const ComplexMatrix& unitary, const DensityMatrix& rho) {
  if (unitary.rows() != rho.dim() || unitary.cols() != rho.dim())
    throw DimensionError("conjugate: unitary size does not match state dim");
  return DensityMatrix::project(
      HermitianOperator(ComplexMatrix(unitary * rho.matrix() * unitary.adjoint())), 1e-9);
}

double trace_product(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw DimensionError("trace_product: dimension mismatch");
  // Tr[AB] = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
  return (a.matrix().array() * b.matrix().conjugate().array()).sum().real();
}

double expectation(const HermitianOperator& h, const PureState& psi) {
  if (h.dim() != psi.dim()) throw DimensionError("expectation: dimension mismatch");
  return psi.amplitudes().dot(h.matrix() * psi.amplitudes()).real();
}

EigenPair max_eig(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h.matrix());
  const Eigen::Index top = h.dim() - 1;
  return {es.eigenvalues()(top), PureState::normalized(es.eigenvectors().col(top))};
}

double max_eigenvalue(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_eigenvalue(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<HermitianOperator> hermitian_basis(int d) {
  if (d < 1) throw DimensionError("hermitian_basis: d must be >= 1");
  std::vector<HermitianOperator> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);
  basis.push_back(HermitianOperator(ComplexMatrix(ComplexMatrix::Identity(d, d) / std::sqrt(double(d)))));
  const double r2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      ComplexMatrix s = ComplexMatrix::Zero(d, d);
      s(j, k) = r2;
      s(k, j) = r2;
      basis.emplace_back(s);
      ComplexMatrix a = ComplexMatrix::Zero(d, d);
      a(j, k) = Complex(0.0, -r2);
      a(k, j) = Complex(0.0, r2);
      basis.emplace_back(a);
    }
  for (int l = 1; l < d; ++l) {
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    const double c = 1.0 / std::sqrt(double(l) * (l + 1));
    for (int j = 0; j < l; ++j) m(j, j) = c;
    m(l, l) = -l * c;
    basis.emplace_back(m);
  }
  return basis;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("max_abs_diff: shape mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

DensityMatrix random_density_matrix(int d, std::uint64_t seed) {
  if (d < 1) throw DimensionError("random_density_matrix: d must be >= 1");
  std::mt19937_64 rng(seed);
  const ComplexMatrix g = gaussian_matrix(d, d, rng);
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix::project(HermitianOperator(m), 1e-12);
}

ComplexMatrix random_unitary(int d, std::uint64_t seed) {
  if (d < 1) throw DimensionError("random_unitary: d must be >= 1");
  std::mt19937_64 rng(seed);
  return phase_fixed_q(gaussian_matrix(d, d, rng));
}

PureState random_pure_state(int d, std::uint64_t seed) {
  if (d < 1) throw DimensionError("random_pure_state: d must be >= 1");
  std::mt19937_64 rng(seed);
  return PureState::normalized(gaussian_matrix(d, 1, rng).col(0));
}

HermitianOperator random_hermitian(int d, std::uint64_t seed) {
  if (d < 1) throw DimensionError("random_hermitian: d must be >= 1");
  std::mt19937_64 rng(seed);
  const ComplexMatrix g = gaussian_matrix(d, d, rng);
  return HermitianOperator(ComplexMatrix((g + g.adjoint()) / 2.0));
}

KrausChannel random_kraus_channel(int dim_in, int dim_out, int num_ops, std::uint64_t seed) {
  if (dim_in < 1 || dim_out < 1 || num_ops < 1)
    throw DimensionError("random_kraus_channel: dims and operator count must be >= 1");
  if (dim_out * num_ops < dim_in)
    throw DimensionError("random_kraus_channel: need dim_out * num_ops >= dim_in");
  std::mt19937_64 rng(seed);
  // Stacked Kraus operators form an isometry V with V^dagger V = I.
  const ComplexMatrix v = phase_fixed_q(gaussian_matrix(dim_out * num_ops, dim_in, rng));
  std::vector<ComplexMatrix> ops;
  for (int k = 0; k < num_ops; ++k) ops.emplace_back(v.middleRows(k * dim_out, dim_out));
  return KrausChannel(dim_in, dim_out, std::move(ops));
}

}  // namespace qot
