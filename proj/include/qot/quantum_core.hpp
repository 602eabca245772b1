#pragma once

// Dense complex linear algebra and the quantum-information primitives used by
// the transport SDPs: projectors onto (anti)symmetric subspaces, partial
// traces, the UU-twirl, Kraus channels and seeded random instances.
//
// Subsystem ordering is row-major Kronecker order everywhere: for dims
// {d0, d1, ...} the basis index is i0 * (d1 * d2 ...) + i1 * (d2 ...) + ...

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qot {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvariantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kHermitianRejectTol = 1e-8;
inline constexpr double kDensityEigTol = 1e-10;
inline constexpr double kDensityTraceTol = 1e-10;
inline constexpr double kPureNormTol = 1e-12;
inline constexpr double kKrausTol = 1e-10;

/// Square complex matrix equal to its adjoint. Construction symmetrizes
/// (M + M^dagger) / 2 and rejects inputs whose anti-Hermitian part exceeds
/// kHermitianRejectTol in max-norm.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(const ComplexMatrix& m);

  static HermitianOperator zero(int dim);
  static HermitianOperator identity(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

  HermitianOperator operator+(const HermitianOperator& o) const;
  HermitianOperator operator-(const HermitianOperator& o) const;
  HermitianOperator operator*(double s) const;

 private:
  ComplexMatrix m_;
};

/// Hermitian, PSD (smallest eigenvalue >= -1e-10), unit trace (within 1e-10).
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(const HermitianOperator& op);
  explicit DensityMatrix(const ComplexMatrix& m) : DensityMatrix(HermitianOperator(m)) {}

  /// Accepts an operator that is a state up to `tol` (eigenvalues >= -tol,
  /// |trace - 1| <= tol), clips negative eigenvalues and renormalizes.
  static DensityMatrix project(const HermitianOperator& op, double tol);
  static DensityMatrix maximally_mixed(int dim);
  static DensityMatrix basis_state(int dim, int index);

  int dim() const { return op_.dim(); }
  const HermitianOperator& op() const { return op_; }
  const ComplexMatrix& matrix() const { return op_.matrix(); }

 private:
  HermitianOperator op_;
};

/// Unit-norm state vector.
class PureState {
 public:
  PureState() = default;
  /// Requires ||v|| = 1 within kPureNormTol.
  explicit PureState(const ComplexVector& v);
  /// Rescales any nonzero vector to unit norm.
  static PureState normalized(const ComplexVector& v);

  int dim() const { return static_cast<int>(v_.size()); }
  const ComplexVector& amplitudes() const { return v_; }
  DensityMatrix projector() const;

 private:
  ComplexVector v_;
};

/// Completely positive trace-preserving map X -> sum_k K_k X K_k^dagger.
class KrausChannel {
 public:
  KrausChannel(int dim_in, int dim_out, std::vector<ComplexMatrix> kraus_ops);

  int dim_in() const { return dim_in_; }
  int dim_out() const { return dim_out_; }
  const std::vector<ComplexMatrix>& kraus_ops() const { return ops_; }

  static KrausChannel identity(int dim);
  /// X -> Tr[X] I / dim_out.
  static KrausChannel completely_depolarizing(int dim_in, int dim_out);
  /// Traces out subsystem `traced` of a bipartite system with dims {d0, d1}.
  static KrausChannel partial_trace(int d0, int d1, int traced);

 private:
  int dim_in_;
  int dim_out_;
  std::vector<ComplexMatrix> ops_;
};

/// Index bookkeeping for splitting a multipartite space into a set of kept
/// subsystems and its complement. full_index(k, t) is the basis index of the
/// full space whose kept coordinates form multi-index k and whose remaining
/// coordinates form t.
class SubsystemSplit {
 public:
  SubsystemSplit(std::vector<int> dims, std::vector<int> kept);

  int total_dim() const { return total_; }
  int kept_dim() const { return kept_dim_; }
  int rest_dim() const { return rest_dim_; }
  int full_index(int kept_index, int rest_index) const {
    return table_[static_cast<std::size_t>(kept_index) * rest_dim_ + rest_index];
  }

 private:
  int total_ = 1;
  int kept_dim_ = 1;
  int rest_dim_ = 1;
  std::vector<int> table_;
};

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

HermitianOperator flip_operator(int d);
HermitianOperator proj_sym(int d);
HermitianOperator proj_asym(int d);
/// Antisymmetric projector for the exchange A1A2 <-> B1B2, acting on the
/// ordering A1 B1 A2 B2: (I - F_{d1} (x) F_{d2}) / 2.
HermitianOperator proj_asym_reshuffled(int d1, int d2);

/// Reduced operator on the subsystems listed in `keep` (strictly increasing).
ComplexMatrix partial_trace(const ComplexMatrix& x, std::span<const int> dims,
                            std::span<const int> keep);
DensityMatrix partial_trace(const DensityMatrix& x, std::span<const int> dims,
                            std::span<const int> keep);

/// op acting on subsystems `sites` (strictly increasing), identity elsewhere.
ComplexMatrix lift_operator(const ComplexMatrix& op, std::span<const int> dims,
                            std::span<const int> sites);

/// UU-twirl on C^d (x) C^d in closed form.
HermitianOperator twirl(const HermitianOperator& x);

DensityMatrix apply_channel(const KrausChannel& channel, const DensityMatrix& rho);
DensityMatrix conjugate(const ComplexMatrix& unitary, const DensityMatrix& rho);

/// Re Tr[a b].
double trace_product(const HermitianOperator& a, const HermitianOperator& b);
double expectation(const HermitianOperator& h, const PureState& psi);

struct EigenPair {
  double value;
  PureState vector;
};
EigenPair max_eig(const HermitianOperator& h);
double max_eigenvalue(const HermitianOperator& h);
double min_eigenvalue(const HermitianOperator& h);

/// Orthonormal (Hilbert-Schmidt) Hermitian basis of d x d matrices:
/// I / sqrt(d) first, then the generalized Gell-Mann matrices.
std::vector<HermitianOperator> hermitian_basis(int d);

/// Largest |entry| of a - b.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

// Seeded random instances. Identical seeds give identical outputs.
DensityMatrix random_density_matrix(int d, std::uint64_t seed);
ComplexMatrix random_unitary(int d, std::uint64_t seed);
PureState random_pure_state(int d, std::uint64_t seed);
HermitianOperator random_hermitian(int d, std::uint64_t seed);
KrausChannel random_kraus_channel(int dim_in, int dim_out, int num_ops, std::uint64_t seed);

}  // namespace qot
