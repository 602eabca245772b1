#include "qot/counterexample.hpp"

#include <array>
#include <cmath>
#include <random>

namespace qot {

namespace {

ComplexMatrix pad_block(const ComplexMatrix& m, int k, double value) {
  const Eigen::Index d = m.rows();
  ComplexMatrix out = ComplexMatrix::Zero(d + k, d + k);
  out.topLeftCorner(d, d) = m;
  for (int i = 0; i < k; ++i) out(d + i, d + i) = value;
  return out;
}

double asym_excess(const HermitianOperator& e, const HermitianOperator& f) {
  return max_eigenvalue(witness_operator(e, f) - proj_asym(e.dim()));
}

std::pair<DensityMatrix, DensityMatrix> marginals(const PureState& psi, int d) {
  const std::array<int, 2> dims{d, d};
  const std::array<int, 1> a{0};
  const std::array<int, 1> b{1};
  const DensityMatrix joint = psi.projector();
  return {partial_trace(joint, dims, a), partial_trace(joint, dims, b)};
}

}  // namespace

HermitianOperator paper_e() {
  ComplexMatrix e = ComplexMatrix::Zero(4, 4);
  e(0, 0) = -1.37;
  e(1, 1) = 0.02;
  e(2, 2) = 0.17;
  e(3, 3) = 0.26;
  return HermitianOperator(e);
}

HermitianOperator paper_f() {
  using C = Complex;
  ComplexMatrix f(4, 4);
  f << C(0.1165, 0.0),   C(-0.02, 0.01),  C(0.03, -0.05),  C(-0.04, -0.05),
       C(-0.02, -0.01),  C(-0.0935, 0.0), C(0.0, 0.02),    C(0.16, -0.11),
       C(0.03, 0.05),    C(0.0, -0.02),   C(-0.2335, 0.0), C(0.06, 0.11),
       C(-0.04, 0.05),   C(0.16, 0.11),   C(0.06, -0.11),  C(-1.1435, 0.0);
  return HermitianOperator(f);
}

RepairedWitness repair_witness(const HermitianOperator& e, const HermitianOperator& f) {
  const double delta = asym_excess(e, f);
  if (delta <= 0.0) return {DualWitness(e, f), 0.0};
  return {DualWitness(e - HermitianOperator::identity(e.dim()) * delta, f), delta};
}

DualWitness paper_witness() { return repair_witness(paper_e(), paper_f()).witness; }

double sym_violation(const HermitianOperator& e, const HermitianOperator& f) {
  return max_eigenvalue(witness_operator(e, f) - proj_sym(e.dim()));
}

double sym_violation(const DualWitness& w) { return sym_violation(w.e(), w.f()); }

Lemma31Check check_lemma31(const HermitianOperator& e, const HermitianOperator& f, int d2) {
  if (e.dim() != f.dim()) throw DimensionError("check_lemma31: E and F differ in dimension");
  if (d2 < 1) throw DimensionError("check_lemma31: d2 must be >= 1");
  const int d1 = e.dim();
  const auto k = witness_operator(e, f);
  const auto env = HermitianOperator::identity(d2 * d2);

  Lemma31Check out;
  out.margin_tensored = max_eigenvalue(tensor(k, env) - proj_asym_reshuffled(d1, d2));
  out.margin_asym = max_eigenvalue(k - proj_asym(d1));
  out.margin_sym = max_eigenvalue(k - proj_sym(d1));
  out.cond_tensored = out.margin_tensored <= kLemmaDeadZone;
  out.cond_asym = out.margin_asym <= kLemmaDeadZone;
  out.cond_sym = out.margin_sym <= kLemmaDeadZone;
  out.conclusive = std::abs(out.margin_tensored) > kLemmaDeadZone &&
                   std::abs(out.margin_asym) > kLemmaDeadZone && std::abs(out.margin_sym) > kLemmaDeadZone;
  out.consistent = out.cond_tensored == (out.cond_asym && out.cond_sym);
  return out;
}

EmbeddedWitness embed_witness(const DualWitness& base, int k, std::optional<double> alpha) {
  if (k < 1) throw DimensionError("embed_witness: k must be >= 1");
  const ComplexMatrix& e = base.e().matrix();
  const ComplexMatrix& f = base.f().matrix();
  auto build = [&](double a) {
    return std::pair{HermitianOperator(pad_block(e, k, -a)), HermitianOperator(pad_block(f, k, -a))};
  };
  if (alpha) {
    auto [e2, f2] = build(*alpha);
    return {DualWitness(e2, f2), *alpha};
  }

  // The padded pair contains the base pair as a block, so its excess can't
  // drop below the base's own.
  const double target = std::max(0.0, -base.feasibility_margin());
  auto feasible = [&](double a) {
    auto [e2, f2] = build(a);
    return asym_excess(e2, f2) <= target;
  };
  constexpr double kMaxAlpha = 100.0;
  if (!feasible(kMaxAlpha))
    throw InvariantError("embed_witness: no alpha <= 100 makes the embedded witness feasible");
  double lo = 0.0;
  double hi = kMaxAlpha;
  if (feasible(lo)) hi = lo;
  while (hi - lo > 1e-4) {
    const double mid = (lo + hi) / 2.0;
    (feasible(mid) ? hi : lo) = mid;
  }
  const double chosen = 2.0 * hi;
  auto [e2, f2] = build(chosen);
  return {DualWitness(e2, f2), chosen};
}

PureState extract_violating_state(const DualWitness& witness) {
  const auto top = max_eig(witness_operator(witness.e(), witness.f()) - proj_sym(witness.dim()));
  if (top.value <= kMinSymViolation)
    throw InvariantError("extract_violating_state: witness satisfies E (x) I + I (x) F <= P_sym "
                         "(violation " + std::to_string(top.value) + ")");
  return top.vector;
}

ViolationReport violation_report(int d, double tol) {
  if (d == 3)
    throw DimensionError("violation_report: no witness is known for d = 3; whether one exists is an "
                         "open question (supported range is 4 <= d <= 6)");
  if (d < 4 || d > 6) throw DimensionError("violation_report: d must satisfy 4 <= d <= 6");

  const RepairedWitness base = repair_witness(paper_e(), paper_f());
  double alpha = 0.0;
  DualWitness witness = base.witness;
  if (d > 4) {
    EmbeddedWitness emb = embed_witness(base.witness, d - 4);
    alpha = emb.alpha;
    witness = emb.witness;
  }

  const PureState psi = extract_violating_state(witness);
  auto [rho, sigma] = marginals(psi, d);
  const TransportResult t = transport_cost(rho, sigma, tol);
  const StabilizedResult ts = stabilized_cost(rho, sigma, tol);

  const double psym = expectation(proj_sym(d), psi);
  const double kexp = expectation(witness_operator(witness.e(), witness.f()), psi);
  const double bound = dual_value(rho, sigma, witness);
  const double violation = sym_violation(witness);

  std::vector<std::string> failed;
  if (!(ts.value <= psym + kChainTol)) failed.push_back("T_s <= <psi|P_sym|psi>");
  if (!(psym < kexp)) failed.push_back("<psi|P_sym|psi> < <psi|E(x)I + I(x)F|psi>");
  if (!(std::abs(kexp - bound) <= kChainTol)) failed.push_back("<psi|E(x)I + I(x)F|psi> = Tr[E rho] + Tr[F sigma]");
  if (!(bound <= t.value + kChainTol)) failed.push_back("Tr[E rho] + Tr[F sigma] <= T");
  if (!failed.empty()) {
    std::string msg = "violation_report: chain failed at";
    for (const auto& f : failed) msg += " [" + f + "]";
    throw ChainError(msg);
  }

  const double gap = t.value - ts.value;
  return ViolationReport{
      .dim = d,
      .witness = witness,
      .repair_shift = base.repair_shift,
      .embedding_alpha = alpha,
      .psi = psi,
      .rho = rho,
      .sigma = sigma,
      .t_value = t.value,
      .ts_value = ts.value,
      .gap = gap,
      .sym_violation = violation,
      .psym_expectation = psym,
      .witness_expectation = kexp,
      .dual_bound = bound,
      .t_solver_gap = t.gap,
      .ts_solver_gap = ts.gap,
      .solver_tol = tol,
      .chain_tol = kChainTol,
      .claims_violation = gap > 10.0 * tol && violation > 0.0,
  };
}

std::optional<DualWitness> search_witness(int d, std::uint64_t seed, int iterations) {
  if (d < 2) throw DimensionError("search_witness: d must be >= 2");
  constexpr double kAccept = 1e-6;
  constexpr double kStall = 1e-10;
  std::mt19937_64 rng(seed);
  const HermitianOperator ps = proj_sym(d);

  std::optional<DualWitness> best;
  double best_violation = kAccept;
  int budget = iterations;
  while (budget > 0) {
    PureState psi = random_pure_state(d * d, rng());
    double prev = -std::numeric_limits<double>::infinity();
    while (budget > 0) {
      --budget;
      auto [rho, sigma] = marginals(psi, d);
      std::optional<TransportResult> t;
      try {
        t.emplace(transport_cost(rho, sigma));
      } catch (const SolverError&) {
        break;
      }
      const RepairedWitness w = repair_witness(t->dual_witness.e(), t->dual_witness.f());
      const auto top = max_eig(witness_operator(w.witness.e(), w.witness.f()) - ps);
      if (top.value > best_violation) {
        best_violation = top.value;
        best = w.witness;
      }
      if (top.value <= prev + kStall) break;
      prev = top.value;
      psi = top.vector;
    }
    if (best) return best;
  }
  return best;
}

}  // namespace qot
