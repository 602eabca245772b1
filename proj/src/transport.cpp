#include "qot/transport.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace qot {

namespace {

SparseComplexMatrix lift_sparse(const HermitianOperator& op, const SubsystemSplit& split) {
  std::vector<Eigen::Triplet<Complex>> trips;
  const ComplexMatrix& m = op.matrix();
  for (int r = 0; r < op.dim(); ++r)
    for (int c = 0; c < op.dim(); ++c) {
      if (m(r, c) == Complex(0.0)) continue;
      for (int t = 0; t < split.rest_dim(); ++t)
        trips.emplace_back(split.full_index(r, t), split.full_index(c, t), m(r, c));
    }
  SparseComplexMatrix out(split.total_dim(), split.total_dim());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

ComplexMatrix support_isometry(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix());
  const auto& w = es.eigenvalues();
  if (w.minCoeff() > kSupportTol) return ComplexMatrix::Identity(rho.dim(), rho.dim());
  std::vector<int> keep;
  for (int i = 0; i < rho.dim(); ++i)
    if (w(i) > kSupportTol) keep.push_back(i);
  ComplexMatrix v(rho.dim(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) v.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]);
  return v;
}

// Complement of the support: I - V V^dagger.
ComplexMatrix kernel_projector(const ComplexMatrix& v) {
  return ComplexMatrix::Identity(v.rows(), v.rows()) - v * v.adjoint();
}

void require_optimal(const SdpSolution& sol, const char* what) {
  if (sol.status == SdpStatus::optimal) return;
  char detail[96];
  std::snprintf(detail, sizeof detail, " (gap %.3e, infeasibility %.3e)", sol.gap,
                std::max(sol.primal_infeasibility, sol.dual_infeasibility));
  throw SolverError(std::string(what) + ": solver stopped with status " + to_string(sol.status) + detail);
}

void require_same_dim(const DensityMatrix& rho, const DensityMatrix& sigma, const char* what) {
  if (rho.dim() != sigma.dim())
    throw DimensionError(std::string(what) + ": rho and sigma have different dimensions");
}

double marginal_error(const ComplexMatrix& joint, int d, const DensityMatrix& rho,
                      const DensityMatrix& sigma) {
  const std::array<int, 2> dims{d, d};
  const std::array<int, 1> a{0};
  const std::array<int, 1> b{1};
  return std::max(max_abs_diff(partial_trace(joint, dims, a), rho.matrix()),
                  max_abs_diff(partial_trace(joint, dims, b), sigma.matrix()));
}

double marginal_tol(double solver_tol) { return std::max(kMarginalTol, 10.0 * solver_tol); }

}  // namespace

// ---------------------------------------------------------------------------

HermitianOperator witness_operator(const HermitianOperator& e, const HermitianOperator& f) {
  if (e.dim() != f.dim()) throw DimensionError("witness_operator: E and F differ in dimension");
  const auto id = HermitianOperator::identity(e.dim());
  return tensor(e, id) + tensor(id, f);
}

DualWitness::DualWitness(HermitianOperator e, HermitianOperator f) : e_(std::move(e)), f_(std::move(f)) {
  margin_ = -max_eigenvalue(witness_operator(e_, f_) - proj_asym(e_.dim()));
  if (margin_ < -kWitnessTol)
    throw InvariantError("DualWitness: E (x) I + I (x) F exceeds P_asym by " + std::to_string(-margin_));
}

CouplingSdp coupling_problem(const std::vector<HermitianOperator>& objective, std::span<const int> dims,
                             std::span<const int> sites_a, const DensityMatrix& marginal_a,
                             std::span<const int> sites_b, const DensityMatrix& marginal_b) {
  const SubsystemSplit split({dims.begin(), dims.end()}, {sites_a.begin(), sites_a.end()});
  std::vector<int> complement;
  for (int i = 0; i < static_cast<int>(dims.size()); ++i)
    if (std::find(sites_a.begin(), sites_a.end(), i) == sites_a.end()) complement.push_back(i);
  if (!std::equal(complement.begin(), complement.end(), sites_b.begin(), sites_b.end()))
    throw DimensionError("coupling_problem: B subsystems must be the complement of the A subsystems");
  if (split.kept_dim() != marginal_a.dim() || split.rest_dim() != marginal_b.dim())
    throw DimensionError("coupling_problem: marginal dimension does not match its subsystems");
  if (objective.empty()) throw DimensionError("coupling_problem: no objective blocks");
  for (const auto& c : objective)
    if (c.dim() != split.total_dim())
      throw DimensionError("coupling_problem: objective not dimensioned to the coupling space");

  const ComplexMatrix va = support_isometry(marginal_a);
  const ComplexMatrix vb = support_isometry(marginal_b);
  const int ra = static_cast<int>(va.cols());
  const int rb = static_cast<int>(vb.cols());
  ComplexMatrix w = ComplexMatrix::Zero(split.total_dim(), ra * rb);
  for (int ka = 0; ka < split.kept_dim(); ++ka)
    for (int kb = 0; kb < split.rest_dim(); ++kb)
      for (int i = 0; i < ra; ++i)
        for (int j = 0; j < rb; ++j) w(split.full_index(ka, kb), i * rb + j) = va(ka, i) * vb(kb, j);

  std::vector<HermitianOperator> reduced_objective;
  for (const auto& c : objective)
    reduced_objective.emplace_back(ComplexMatrix(w.adjoint() * c.matrix() * w));
  SdpProblem problem(std::move(reduced_objective));
  const int num_blocks = problem.num_blocks();

  const SubsystemSplit reduced_a({ra, rb}, {0});
  const SubsystemSplit reduced_b({ra, rb}, {1});
  auto add_marginal = [&](const SubsystemSplit& rsplit, const ComplexMatrix& v, const DensityMatrix& target,
                          bool skip_identity) {
    const HermitianOperator compressed(ComplexMatrix(v.adjoint() * target.matrix() * v));
    const auto basis = hermitian_basis(compressed.dim());
    for (std::size_t k = skip_identity ? 1 : 0; k < basis.size(); ++k) {
      SdpConstraint c;
      c.rhs = trace_product(basis[k], compressed);
      const SparseComplexMatrix lifted = lift_sparse(basis[k], rsplit);
      for (int j = 0; j < num_blocks; ++j) c.terms.push_back({j, lifted});
      problem.add_constraint(std::move(c));
    }
  };
  add_marginal(reduced_a, va, marginal_a, false);
  add_marginal(reduced_b, vb, marginal_b, true);
  return CouplingSdp{std::move(problem), std::move(w), va, vb, ra, rb};
}

namespace {

// E and F from the marginal-constraint multipliers. Directions outside the
// marginals' supports carry no constraint in the reduced problem; they get a
// penalty -lambda * (I - V V^dagger), with lambda picked from a fixed ladder
// to maximize the certified bound. Any remaining excess over P_asym is removed
// by an identity shift split evenly between E and F.
DualWitness recover_witness(const CouplingSdp& sdp, const SdpSolution& sol, const DensityMatrix& rho,
                            const DensityMatrix& sigma) {
  const int d = rho.dim();
  const int ra = sdp.rank_a;
  const int rb = sdp.rank_b;
  const auto basis_a = hermitian_basis(ra);
  const auto basis_b = hermitian_basis(rb);
  ComplexMatrix er = ComplexMatrix::Zero(ra, ra);
  ComplexMatrix fr = ComplexMatrix::Zero(rb, rb);
  for (int k = 0; k < ra * ra; ++k) er += sol.dual_vector(k) * basis_a[k].matrix();
  for (int k = 1; k < rb * rb; ++k) fr += sol.dual_vector(ra * ra - 1 + k) * basis_b[k].matrix();
  const ComplexMatrix e0 = sdp.support_a * er * sdp.support_a.adjoint();
  const ComplexMatrix f0 = sdp.support_b * fr * sdp.support_b.adjoint();
  const ComplexMatrix ker_a = kernel_projector(sdp.support_a);
  const ComplexMatrix ker_b = kernel_projector(sdp.support_b);
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const HermitianOperator pa = proj_asym(d);

  auto candidate = [&](double lambda) {
    ComplexMatrix e = e0 - lambda * ker_a;
    ComplexMatrix f = f0 - lambda * ker_b;
    const double shift = (e.trace().real() - f.trace().real()) / (2.0 * d);
    e -= shift * id;
    f += shift * id;
    HermitianOperator eh(e), fh(f);
    const double excess = max_eigenvalue(witness_operator(eh, fh) - pa);
    if (excess > 0.0) {
      const auto half = HermitianOperator::identity(d) * (excess / 2.0);
      eh = eh - half;
      fh = fh - half;
    }
    const double bound = trace_product(eh, rho.op()) + trace_product(fh, sigma.op());
    return std::pair{bound, DualWitness(eh, fh)};
  };

  if (ra == d && rb == d) return candidate(0.0).second;
  auto best = candidate(1.0);
  for (double lambda = 10.0; lambda <= 1e6; lambda *= 10.0) {
    auto next = candidate(lambda);
    if (next.first > best.first) best = std::move(next);
  }
  return best.second;
}

}  // namespace

TransportResult transport_cost(const DensityMatrix& rho, const DensityMatrix& sigma, double tol) {
  require_same_dim(rho, sigma, "transport_cost");
  const int d = rho.dim();
  const std::array<int, 2> dims{d, d};
  const std::array<int, 1> a{0};
  const std::array<int, 1> b{1};
  const CouplingSdp sdp = coupling_problem({proj_asym(d)}, dims, a, rho, b, sigma);
  const SdpSolution sol = solve(sdp.problem, tol);
  require_optimal(sol, "transport_cost");

  const ComplexMatrix tau = sdp.lift(sol.primal_blocks[0]);
  if (marginal_error(tau, d, rho, sigma) > marginal_tol(tol))
    throw SolverError("transport_cost: coupling marginals deviate beyond tolerance");
  DensityMatrix coupling = DensityMatrix::project(HermitianOperator(tau), std::max(1e-6, 10.0 * tol));
  return TransportResult{sol.primal_value, std::move(coupling), recover_witness(sdp, sol, rho, sigma), sol.gap,
                         sol.iterations};
}

double dual_value(const DensityMatrix& rho, const DensityMatrix& sigma, const DualWitness& witness) {
  require_same_dim(rho, sigma, "dual_value");
  if (witness.dim() != rho.dim()) throw DimensionError("dual_value: witness dimension mismatch");
  if (witness.feasibility_margin() < -kWitnessTol)
    throw InvariantError("dual_value: witness is not dual feasible");
  return trace_product(witness.e(), rho.op()) + trace_product(witness.f(), sigma.op());
}

double wasserstein(const DensityMatrix& rho, const DensityMatrix& sigma, double tol) {
  return std::sqrt(std::max(0.0, transport_cost(rho, sigma, tol).value));
}

StabilizedResult stabilized_cost(const DensityMatrix& rho, const DensityMatrix& sigma, double tol) {
  require_same_dim(rho, sigma, "stabilized_cost");
  const int d = rho.dim();
  const std::array<int, 2> dims{d, d};
  const std::array<int, 1> a{0};
  const std::array<int, 1> b{1};
  const CouplingSdp sdp = coupling_problem({proj_sym(d), proj_asym(d)}, dims, a, rho, b, sigma);
  const SdpSolution sol = solve(sdp.problem, tol);
  require_optimal(sol, "stabilized_cost");
  const ComplexMatrix x = sdp.lift(sol.primal_blocks[0]);
  const ComplexMatrix y = sdp.lift(sol.primal_blocks[1]);
  if (marginal_error(x + y, d, rho, sigma) > marginal_tol(tol))
    throw SolverError("stabilized_cost: X + Y marginals deviate beyond tolerance");
  return StabilizedResult{sol.primal_value, HermitianOperator(x), HermitianOperator(y), sol.gap,
                          sol.iterations};
}

double stabilized_wasserstein(const DensityMatrix& rho, const DensityMatrix& sigma, double tol) {
  return std::sqrt(std::max(0.0, stabilized_cost(rho, sigma, tol).value));
}

double tensored_cost(const DensityMatrix& rho1, const DensityMatrix& sigma1, const DensityMatrix& rho2,
                     const DensityMatrix& sigma2, double tol) {
  require_same_dim(rho1, sigma1, "tensored_cost");
  require_same_dim(rho2, sigma2, "tensored_cost");
  const int d1 = rho1.dim();
  const int d2 = rho2.dim();
  const int coupling_dim = d1 * d1 * d2 * d2;
  if (coupling_dim >= kMaxCouplingDim)
    throw DimensionError("tensored_cost: coupling dimension " + std::to_string(coupling_dim) +
                         " exceeds the supported size (must be below " + std::to_string(kMaxCouplingDim) + ")");
  const std::array<int, 4> dims{d1, d1, d2, d2};
  const std::array<int, 2> a{0, 2};
  const std::array<int, 2> b{1, 3};
  const CouplingSdp sdp = coupling_problem({proj_asym_reshuffled(d1, d2)}, dims, a, tensor(rho1, rho2), b,
                                           tensor(sigma1, sigma2));
  const SdpSolution sol = solve(sdp.problem, tol);
  require_optimal(sol, "tensored_cost");
  return sol.primal_value;
}

double stabilized_cost_via_tensoring(const DensityMatrix& rho, const DensityMatrix& sigma, double tol) {
  const auto half = DensityMatrix::maximally_mixed(2);
  return tensored_cost(rho, sigma, half, half, tol);
}

}  // namespace qot
