#pragma once

// Non-monotonicity of T under partial traces, reproduced end to end.
//
// A dual witness (E, F) that is feasible for P_asym(d) but violates
// E (x) I + I (x) F <= P_sym(d) yields a pure state psi with
//
//   T_s(rho, sigma) <= <psi|P_sym|psi> < <psi|E (x) I + I (x) F|psi>
//                   = Tr[E rho] + Tr[F sigma] <= T(rho, sigma)
//
// for rho, sigma the marginals of psi. T_s(rho, sigma) equals
// T(rho (x) I/2, sigma (x) I/2), so tracing out the qubit increases T.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qot/quantum_core.hpp"
#include "qot/transport.hpp"

namespace qot {

class ChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kChainTol = 1e-7;
inline constexpr double kLemmaDeadZone = 1e-9;
inline constexpr double kMinSymViolation = 1e-9;

/// The 4 x 4 witness matrices exactly as printed (4 decimal places).
HermitianOperator paper_e();
HermitianOperator paper_f();

struct RepairedWitness {
  DualWitness witness;
  double repair_shift = 0.0;  // delta subtracted from E, zero when already feasible
};

/// If lambda_max(E (x) I + I (x) F - P_asym) = delta > 0, replaces E by E - delta I.
RepairedWitness repair_witness(const HermitianOperator& e, const HermitianOperator& f);

/// The printed witness after the repair rule (a no-op for the printed values).
DualWitness paper_witness();

/// lambda_max(E (x) I + I (x) F - P_sym(d)); positive means the witness
/// certifies a monotonicity violation.
double sym_violation(const HermitianOperator& e, const HermitianOperator& f);
double sym_violation(const DualWitness& w);

struct Lemma31Check {
  // lambda_max(LHS - RHS) for the three operator inequalities.
  double margin_tensored = 0.0;  // E(x)I(x)I(x)I + I(x)F(x)I(x)I vs P_asym(d1 (x) d2)
  double margin_asym = 0.0;      // E(x)I + I(x)F vs P_asym(d1)
  double margin_sym = 0.0;       // E(x)I + I(x)F vs P_sym(d1)
  bool cond_tensored = false;
  bool cond_asym = false;
  bool cond_sym = false;
  bool conclusive = false;  // every margin outside the dead zone
  bool consistent = false;  // cond_tensored == (cond_asym && cond_sym)
};

Lemma31Check check_lemma31(const HermitianOperator& e, const HermitianOperator& f, int d2);

struct EmbeddedWitness {
  DualWitness witness;
  double alpha = 0.0;
};

/// E' = diag(E, -alpha I_k), F' = diag(F, -alpha I_k). Without an explicit
/// alpha, the smallest feasible value in [0, 100] is bisected to 1e-4 and
/// doubled.
EmbeddedWitness embed_witness(const DualWitness& base, int k, std::optional<double> alpha = std::nullopt);

/// Top eigenvector of E (x) I + I (x) F - P_sym(d).
PureState extract_violating_state(const DualWitness& witness);

struct ViolationReport {
  int dim = 0;
  DualWitness witness;
  double repair_shift = 0.0;
  double embedding_alpha = 0.0;  // zero for d = 4
  PureState psi;
  DensityMatrix rho;
  DensityMatrix sigma;
  double t_value = 0.0;
  double ts_value = 0.0;
  double gap = 0.0;  // t_value - ts_value
  double sym_violation = 0.0;
  double psym_expectation = 0.0;    // <psi|P_sym|psi>
  double witness_expectation = 0.0; // <psi|E (x) I + I (x) F|psi>
  double dual_bound = 0.0;          // Tr[E rho] + Tr[F sigma]
  double t_solver_gap = 0.0;
  double ts_solver_gap = 0.0;
  double solver_tol = 0.0;
  double chain_tol = kChainTol;
  bool claims_violation = false;  // gap > 10 * solver_tol and sym_violation > 0
};

/// Requires 4 <= d <= 6. Throws ChainError if any link of the chain fails.
ViolationReport violation_report(int d, double tol = kDefaultTolerance);

/// Randomized search for a witness in dimension d: alternates between the
/// optimal dual pair for the marginals of the current state and the top
/// eigenvector of E (x) I + I (x) F - P_sym, restarting from random states
/// when the ascent stalls. Each dual solve counts as one iteration.
std::optional<DualWitness> search_witness(int d, std::uint64_t seed, int iterations);

}  // namespace qot
