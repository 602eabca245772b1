#include "qot/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qot {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Entry {
  int row;
  int col;
  double value;
};

struct RealTerm {
  int block;
  std::vector<Entry> entries;
};

// Real symmetric form of the problem. Every trace is doubled by the
// embedding, so the right-hand side is doubled too and y is shared with the
// complex problem.
struct RealProblem {
  std::vector<int> dims;
  std::vector<MatrixXd> objective;
  std::vector<std::vector<RealTerm>> constraints;
  VectorXd rhs;
};

std::vector<Entry> embed_sparse(const SparseComplexMatrix& h) {
  const int n = static_cast<int>(h.rows());
  std::vector<Entry> out;
  for (int k = 0; k < h.outerSize(); ++k)
    for (SparseComplexMatrix::InnerIterator it(h, k); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      const double a = it.value().real();
      const double b = it.value().imag();
      if (a != 0.0) {
        out.push_back({r, c, a});
        out.push_back({r + n, c + n, a});
      }
      if (b != 0.0) {
        out.push_back({r, c + n, -b});
        out.push_back({r + n, c, b});
      }
    }
  return out;
}

RealProblem embed_problem(const SdpProblem& p) {
  RealProblem rp;
  for (int j = 0; j < p.num_blocks(); ++j) {
    rp.dims.push_back(2 * p.block_dim(j));
    rp.objective.push_back(complex_to_real_embedding(p.objective()[j]));
  }
  const auto& cons = p.constraints();
  rp.rhs.resize(static_cast<Eigen::Index>(cons.size()));
  for (std::size_t i = 0; i < cons.size(); ++i) {
    std::vector<RealTerm> terms;
    for (const auto& t : cons[i].terms) terms.push_back({t.block, embed_sparse(t.coefficient)});
    rp.constraints.push_back(std::move(terms));
    rp.rhs(static_cast<Eigen::Index>(i)) = 2.0 * cons[i].rhs;
  }
  return rp;
}

double inner(const MatrixXd& a, const MatrixXd& b) { return (a.array() * b.array()).sum(); }

// A(X)_i = sum_j <A_ij, X_j>; works on non-symmetric X as <A_ij, sym(X_j)>.
VectorXd apply_op(const RealProblem& p, const std::vector<MatrixXd>& x) {
  VectorXd out(p.rhs.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (const auto& t : p.constraints[i])
      for (const auto& e : t.entries) acc += e.value * x[t.block](e.row, e.col);
    out(i) = acc;
  }
  return out;
}

// out_j += scale * sum_i y_i A_ij
void add_adjoint(const RealProblem& p, const VectorXd& y, double scale, std::vector<MatrixXd>& out) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double w = scale * y(i);
    if (w == 0.0) continue;
    for (const auto& t : p.constraints[i])
      for (const auto& e : t.entries) out[t.block](e.row, e.col) += w * e.value;
  }
}

// Largest alpha with X + alpha dX >= 0 (infinity when dX keeps X PSD).
double max_step(const MatrixXd& x, const MatrixXd& dx) {
  Eigen::LLT<MatrixXd> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const auto l = llt.matrixL();
  const MatrixXd t = l.solve(dx);
  MatrixXd s = l.solve(t.transpose());
  s = (s + s.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  return lo >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lo;
}

bool invert_spd(const MatrixXd& m, MatrixXd& inv) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return false;
  inv = llt.solve(MatrixXd::Identity(m.rows(), m.cols()));
  inv = (inv + inv.transpose()) / 2.0;
  return true;
}

// HKM Schur complement M_ij = sum_blocks Tr[A_i Z^-1 A_j X].
MatrixXd schur_complement(const RealProblem& p, const std::vector<MatrixXd>& zinv,
                          const std::vector<MatrixXd>& x) {
  const auto m = static_cast<Eigen::Index>(p.constraints.size());
  MatrixXd out = MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (const auto& ti : p.constraints[i])
        for (const auto& tj : p.constraints[j]) {
          if (ti.block != tj.block) continue;
          const MatrixXd& zi = zinv[ti.block];
          const MatrixXd& xb = x[ti.block];
          for (const auto& a : ti.entries)
            for (const auto& b : tj.entries)
              acc += a.value * b.value * zi(a.col, b.row) * xb(b.col, a.row);
        }
      out(i, j) = acc;
      out(j, i) = acc;
    }
  return out;
}

class SchurSolver {
 public:
  explicit SchurSolver(MatrixXd m) : m_(std::move(m)), llt_(m_) {
    use_ldlt_ = llt_.info() != Eigen::Success;
    if (use_ldlt_) ldlt_.compute(m_);
  }
  bool ok() const { return !use_ldlt_ || ldlt_.info() == Eigen::Success; }
  // Solve with two rounds of iterative refinement.
  VectorXd solve(const VectorXd& rhs) const {
    VectorXd x = raw(rhs);
    for (int k = 0; k < 2; ++k) x += raw(rhs - m_ * x);
    return x;
  }

 private:
  VectorXd raw(const VectorXd& rhs) const { return use_ldlt_ ? VectorXd(ldlt_.solve(rhs)) : VectorXd(llt_.solve(rhs)); }

  MatrixXd m_;
  Eigen::LLT<MatrixXd> llt_;
  Eigen::LDLT<MatrixXd> ldlt_;
  bool use_ldlt_ = false;
};

struct Direction {
  VectorXd dy;
  std::vector<MatrixXd> dx;
  std::vector<MatrixXd> dz;
};

ComplexMatrix de_embed(const MatrixXd& y) {
  const Eigen::Index n = y.rows() / 2;
  const MatrixXd re = (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n)) / 2.0;
  const MatrixXd im = (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n)) / 2.0;
  ComplexMatrix out(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) out(r, c) = Complex(re(r, c), im(r, c));
  return (out + out.adjoint()) / 2.0;
}

}  // namespace

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::max_iterations: return "max_iterations";
    case SdpStatus::infeasible_detected: return "infeasible_detected";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// SdpProblem

SdpProblem::SdpProblem(std::vector<HermitianOperator> objective) : objective_(std::move(objective)) {
  if (objective_.empty()) throw DimensionError("SdpProblem: at least one block is required");
}

void SdpProblem::add_constraint(SdpConstraint constraint) {
  if (!std::isfinite(constraint.rhs)) throw InvariantError("SdpProblem: rhs must be finite");
  for (auto& t : constraint.terms) {
    if (t.block < 0 || t.block >= num_blocks())
      throw DimensionError("SdpProblem: constraint refers to a missing block");
    const int n = block_dim(t.block);
    if (t.coefficient.rows() != n || t.coefficient.cols() != n)
      throw DimensionError("SdpProblem: coefficient not dimensioned to its block");
    const SparseComplexMatrix adj = t.coefficient.adjoint();
    const double anti = n == 0 ? 0.0 : ComplexMatrix(t.coefficient - adj).cwiseAbs().maxCoeff();
    if (anti > 2.0 * kHermitianRejectTol)
      throw InvariantError("SdpProblem: coefficient operator is not Hermitian");
    t.coefficient = (t.coefficient + adj) * 0.5;
    t.coefficient.prune(Complex(0.0));
    t.coefficient.makeCompressed();
  }
  constraints_.push_back(std::move(constraint));
}

void SdpProblem::add_constraint(const std::vector<std::pair<int, HermitianOperator>>& terms,
                                double rhs) {
  SdpConstraint c;
  c.rhs = rhs;
  for (const auto& [block, op] : terms) {
    SparseComplexMatrix s = op.matrix().sparseView();
    c.terms.push_back({block, std::move(s)});
  }
  add_constraint(std::move(c));
}

Eigen::MatrixXd complex_to_real_embedding(const HermitianOperator& h) {
  const int n = h.dim();
  const MatrixXd a = h.matrix().real();
  const MatrixXd b = h.matrix().imag();
  MatrixXd out(2 * n, 2 * n);
  out << a, -b, b, a;
  return out;
}

// ---------------------------------------------------------------------------
// Interior point solver

SdpSolution solve(const SdpProblem& problem, double tol, const SdpOptions& options) {
  if (!(tol >= 1e-10 && tol <= 1e-2)) throw std::invalid_argument("solve: tol must lie in [1e-10, 1e-2]");
  const RealProblem p = embed_problem(problem);
  const int nb = static_cast<int>(p.dims.size());
  const auto m = p.rhs.size();
  const double total_dim = std::accumulate(p.dims.begin(), p.dims.end(), 0.0);

  std::vector<MatrixXd> x(nb), z(nb), zinv(nb);
  VectorXd y = VectorXd::Zero(m);
  for (int j = 0; j < nb; ++j) {
    const int n = p.dims[j];
    double max_a = 0.0;
    double xi = std::max(10.0, std::sqrt(double(n)));
    for (Eigen::Index i = 0; i < m; ++i)
      for (const auto& t : p.constraints[i]) {
        if (t.block != j) continue;
        double fro = 0.0;
        for (const auto& e : t.entries) fro += e.value * e.value;
        fro = std::sqrt(fro);
        max_a = std::max(max_a, fro);
        xi = std::max(xi, n * (1.0 + std::abs(p.rhs(i))) / (1.0 + fro));
      }
    const double eta =
        std::max({10.0, std::sqrt(double(n)), (1.0 + std::max(max_a, p.objective[j].norm())) / std::sqrt(double(n))});
    x[j] = xi * MatrixXd::Identity(n, n);
    z[j] = eta * MatrixXd::Identity(n, n);
  }

  SdpSolution sol;
  double best_gap = std::numeric_limits<double>::infinity();
  int stall = 0;

  auto finish = [&](SdpStatus status, int iters, double pobj, double dobj, double pinf, double dinf) {
    sol.status = status;
    sol.iterations = iters;
    sol.primal_value = pobj / 2.0;
    sol.dual_value = dobj / 2.0;
    sol.gap = std::abs(sol.primal_value - sol.dual_value);
    sol.primal_infeasibility = pinf;
    sol.dual_infeasibility = dinf;
    sol.dual_vector = y;
    sol.primal_blocks.clear();
    for (const auto& xb : x) sol.primal_blocks.push_back(de_embed(xb));
    return sol;
  };

  for (int iter = 0;; ++iter) {
    double pobj = 0.0;
    for (int j = 0; j < nb; ++j) pobj += inner(p.objective[j], x[j]);
    const double dobj = p.rhs.dot(y);
    const VectorXd rp = p.rhs - apply_op(p, x);
    std::vector<MatrixXd> rd(nb);
    for (int j = 0; j < nb; ++j) rd[j] = p.objective[j] - z[j];
    add_adjoint(p, y, -1.0, rd);

    const double pinf = m > 0 ? rp.cwiseAbs().maxCoeff() / 2.0 : 0.0;
    double dinf = 0.0;
    for (const auto& r : rd) dinf = std::max(dinf, r.cwiseAbs().maxCoeff());
    const double gap = std::abs(pobj - dobj) / 2.0;

    if (gap <= tol && pinf <= tol && dinf <= tol)
      return finish(SdpStatus::optimal, iter, pobj, dobj, pinf, dinf);

    // Dual objective running off to +infinity while the dual stays nearly
    // feasible: y / (b.y) approaches a ray certifying primal infeasibility.
    if (dobj / 2.0 > 1e8 && dinf <= 1e-6 * (1.0 + y.cwiseAbs().maxCoeff()))
      return finish(SdpStatus::infeasible_detected, iter, pobj, dobj, pinf, dinf);

    if (iter >= options.max_iterations) return finish(SdpStatus::max_iterations, iter, pobj, dobj, pinf, dinf);

    const double merit = std::max({gap, pinf, dinf});
    if (merit < 0.999 * best_gap) {
      best_gap = merit;
      stall = 0;
    } else if (++stall >= 8) {
      return finish(SdpStatus::max_iterations, iter, pobj, dobj, pinf, dinf);
    }

    double mu = 0.0;
    for (int j = 0; j < nb; ++j) mu += inner(x[j], z[j]);
    mu /= total_dim;

    bool ok = true;
    for (int j = 0; j < nb && ok; ++j) ok = invert_spd(z[j], zinv[j]);
    if (!ok) return finish(SdpStatus::max_iterations, iter, pobj, dobj, pinf, dinf);

    const SchurSolver schur(schur_complement(p, zinv, x));
    if (!schur.ok()) return finish(SdpStatus::max_iterations, iter, pobj, dobj, pinf, dinf);
    // Primal residual left in dX is removed by a correction X A^T(v) X.
    const SchurSolver primal_fix(schur_complement(p, x, x));

    // Base right-hand side b + A(Z^-1 Rd X), shared by predictor and corrector.
    std::vector<MatrixXd> zrx(nb);
    for (int j = 0; j < nb; ++j) zrx[j] = zinv[j] * rd[j] * x[j];
    const VectorXd base_rhs = p.rhs + apply_op(p, zrx);
    const VectorXd a_zinv = apply_op(p, zinv);

    auto direction = [&](double sigma_mu, const std::vector<MatrixXd>* corr) {
      Direction d;
      VectorXd rhs = base_rhs - sigma_mu * a_zinv;
      if (corr) rhs += apply_op(p, *corr);
      d.dy = schur.solve(rhs);
      d.dz = rd;
      add_adjoint(p, d.dy, -1.0, d.dz);
      d.dx.resize(nb);
      for (int j = 0; j < nb; ++j) {
        MatrixXd dx = sigma_mu * zinv[j] - x[j] - zinv[j] * d.dz[j] * x[j];
        if (corr) dx -= (*corr)[j];
        d.dx[j] = (dx + dx.transpose()) / 2.0;
      }
      if (m > 0 && primal_fix.ok()) {
        std::vector<MatrixXd> fix(nb);
        for (int j = 0; j < nb; ++j) fix[j] = MatrixXd::Zero(p.dims[j], p.dims[j]);
        add_adjoint(p, primal_fix.solve(rp - apply_op(p, d.dx)), 1.0, fix);
        for (int j = 0; j < nb; ++j) {
          const MatrixXd c = x[j] * fix[j] * x[j];
          d.dx[j] += (c + c.transpose()) / 2.0;
        }
      }
      return d;
    };
    auto step_lengths = [&](const Direction& d) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = ap;
      for (int j = 0; j < nb; ++j) {
        ap = std::min(ap, max_step(x[j], d.dx[j]));
        ad = std::min(ad, max_step(z[j], d.dz[j]));
      }
      return std::pair{ap, ad};
    };

    const Direction pred = direction(0.0, nullptr);
    auto [ap_pred, ad_pred] = step_lengths(pred);
    ap_pred = std::min(1.0, ap_pred);
    ad_pred = std::min(1.0, ad_pred);
    double mu_aff = 0.0;
    for (int j = 0; j < nb; ++j)
      mu_aff += inner(x[j] + ap_pred * pred.dx[j], z[j] + ad_pred * pred.dz[j]);
    mu_aff /= total_dim;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    std::vector<MatrixXd> corr(nb);
    for (int j = 0; j < nb; ++j) corr[j] = zinv[j] * pred.dz[j] * pred.dx[j];
    const Direction step = direction(sigma * mu, &corr);
    auto [ap, ad] = step_lengths(step);
    const double gamma = 0.9 + 0.09 * std::min(ap_pred, ad_pred);
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);

    for (int j = 0; j < nb; ++j) {
      x[j] += ap * step.dx[j];
      z[j] += ad * step.dz[j];
    }
    y += ad * step.dy;
  }
}

// ---------------------------------------------------------------------------
// Independent verification

FeasibilityMargin feasibility_margin(std::span<const ComplexMatrix> blocks, const SdpProblem& problem,
                                     const std::optional<Eigen::VectorXd>& dual) {
  if (static_cast<int>(blocks.size()) != problem.num_blocks())
    throw DimensionError("feasibility_margin: wrong number of blocks");
  for (int j = 0; j < problem.num_blocks(); ++j)
    if (blocks[j].rows() != problem.block_dim(j) || blocks[j].cols() != problem.block_dim(j))
      throw DimensionError("feasibility_margin: block not dimensioned to problem");

  FeasibilityMargin out;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int j = 0; j < problem.num_blocks(); ++j) {
    const ComplexMatrix& xb = blocks[j];
    out.primal_value += (problem.objective()[j].matrix() * xb).trace().real();
    const ComplexMatrix herm = (xb + xb.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = std::min(out.min_eigenvalue, es.eigenvalues().minCoeff());
  }
  for (const auto& c : problem.constraints()) {
    Complex lhs = 0.0;
    for (const auto& t : c.terms) lhs += (ComplexMatrix(t.coefficient) * blocks[t.block]).trace();
    out.residual = std::max(out.residual, std::abs(lhs.real() - c.rhs));
  }
  if (dual) {
    const auto& y = *dual;
    if (y.size() != static_cast<Eigen::Index>(problem.constraints().size()))
      throw DimensionError("feasibility_margin: dual vector has wrong length");
    double dv = 0.0;
    std::vector<ComplexMatrix> slack;
    for (const auto& obj : problem.objective()) slack.push_back(obj.matrix());
    for (std::size_t i = 0; i < problem.constraints().size(); ++i) {
      const auto& c = problem.constraints()[i];
      dv += y(static_cast<Eigen::Index>(i)) * c.rhs;
      for (const auto& t : c.terms) slack[t.block] -= y(static_cast<Eigen::Index>(i)) * ComplexMatrix(t.coefficient);
    }
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& s : slack) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(ComplexMatrix((s + s.adjoint()) / 2.0), Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    out.dual_value = dv;
    out.gap = out.primal_value - dv;
    out.dual_min_eigenvalue = lo;
  }
  return out;
}

}  // namespace qot
