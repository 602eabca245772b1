#pragma once

// Quantum optimal transport costs with respect to the antisymmetric
// projector, each posed as an SDP over couplings:
//
//   T(rho, sigma)   = min Tr[tau P_asym]  over states tau with tau_A = rho, tau_B = sigma
//   T*(rho, sigma)  = sup Tr[E rho] + Tr[F sigma]  over E (x) I + I (x) F <= P_asym
//   T_s(rho, sigma) = T(rho (x) I/2, sigma (x) I/2)
//                   = min Tr[X P_sym] + Tr[Y P_asym]  over X, Y >= 0 with
//                     X_A + Y_A = rho and X_B + Y_B = sigma.

#include <span>

#include "qot/quantum_core.hpp"
#include "qot/sdp.hpp"

namespace qot {

/// Marginal check on solver output; widened to 10 * tol for looser solves.
inline constexpr double kMarginalTol = 1e-7;
inline constexpr double kWitnessTol = 1e-7;
/// Couplings on spaces of this dimension or larger are refused.
inline constexpr int kMaxCouplingDim = 256;

/// Hermitian pair (E, F) with E (x) I + I (x) F <= P_asym(d) up to kWitnessTol.
class DualWitness {
 public:
  DualWitness(HermitianOperator e, HermitianOperator f);

  int dim() const { return e_.dim(); }
  const HermitianOperator& e() const { return e_; }
  const HermitianOperator& f() const { return f_; }
  /// -lambda_max(E (x) I + I (x) F - P_asym(d)); nonnegative when feasible.
  double feasibility_margin() const { return margin_; }

 private:
  HermitianOperator e_;
  HermitianOperator f_;
  double margin_;
};

/// E (x) I + I (x) F.
HermitianOperator witness_operator(const HermitianOperator& e, const HermitianOperator& f);

struct TransportResult {
  double value = 0.0;
  DensityMatrix coupling;
  DualWitness dual_witness;
  double gap = 0.0;
  int iterations = 0;
};

struct StabilizedResult {
  double value = 0.0;
  HermitianOperator x_block;  // weight on P_sym
  HermitianOperator y_block;  // weight on P_asym
  double gap = 0.0;
  int iterations = 0;
};

TransportResult transport_cost(const DensityMatrix& rho, const DensityMatrix& sigma,
                               double tol = kDefaultTolerance);

/// Tr[E rho] + Tr[F sigma]; a lower bound on transport_cost.
double dual_value(const DensityMatrix& rho, const DensityMatrix& sigma, const DualWitness& witness);

double wasserstein(const DensityMatrix& rho, const DensityMatrix& sigma,
                   double tol = kDefaultTolerance);

StabilizedResult stabilized_cost(const DensityMatrix& rho, const DensityMatrix& sigma,
                                 double tol = kDefaultTolerance);

double stabilized_wasserstein(const DensityMatrix& rho, const DensityMatrix& sigma,
                              double tol = kDefaultTolerance);

/// T(rho (x) I/2, sigma (x) I/2), solved as one coupling SDP on A1 B1 A2 B2.
double stabilized_cost_via_tensoring(const DensityMatrix& rho, const DensityMatrix& sigma,
                                     double tol = kDefaultTolerance);

/// T(rho1 (x) rho2, sigma1 (x) sigma2) with the reshuffled projector as
/// objective on the ordering A1 B1 A2 B2.
double tensored_cost(const DensityMatrix& rho1, const DensityMatrix& sigma1,
                     const DensityMatrix& rho2, const DensityMatrix& sigma2,
                     double tol = kDefaultTolerance);

/// Coupling SDP shared by all of the above. Blocks live on the space with
/// subsystem dims `dims`; the sum of all blocks must have marginal
/// `marginal_a` on subsystems `sites_a` and `marginal_b` on the complementary
/// subsystems `sites_b`.
///
/// Any coupling is supported on supp(marginal_a) (x) supp(marginal_b), so the
/// SDP is posed on that subspace: the reduced variable tau' relates to the
/// full one by tau = isometry * tau' * isometry^dagger. Reduced constraints
/// are the standard bipartite marginal constraints over an orthonormal
/// Hermitian basis of each support: A first (identity element first), then B
/// without its identity element.
struct CouplingSdp {
  SdpProblem problem;
  ComplexMatrix isometry;   // full_dim x (rank_a * rank_b)
  ComplexMatrix support_a;  // dim_a x rank_a, orthonormal columns
  ComplexMatrix support_b;  // dim_b x rank_b
  int rank_a = 0;
  int rank_b = 0;

  ComplexMatrix lift(const ComplexMatrix& reduced) const {
    return isometry * reduced * isometry.adjoint();
  }
};

/// Eigenvalues at or below this are treated as outside a marginal's support.
inline constexpr double kSupportTol = 1e-9;

CouplingSdp coupling_problem(const std::vector<HermitianOperator>& objective, std::span<const int> dims,
                             std::span<const int> sites_a, const DensityMatrix& marginal_a,
                             std::span<const int> sites_b, const DensityMatrix& marginal_b);

}  // namespace qot
