#pragma once

// Small dense semidefinite programs with block-diagonal Hermitian PSD
// variables:
//
//   minimize    sum_j Tr[C_j X_j]
//   subject to  sum_j Tr[A_ij X_j] = b_i   for every constraint i
//               X_j >= 0
//
// with dual  maximize b.y  subject to  C_j - sum_i y_i A_ij >= 0.
//
// Complex blocks are mapped to real symmetric ones through
// complex_to_real_embedding and solved by a primal-dual interior point method
// (HKM search direction, Mehrotra predictor-corrector). Coefficient matrices
// are stored sparse; every SDP built in this project has constraint operators
// of the form H (x) I with H a Gell-Mann matrix.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qot/quantum_core.hpp"

namespace qot {

using SparseComplexMatrix = Eigen::SparseMatrix<Complex>;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SdpTerm {
  int block;
  SparseComplexMatrix coefficient;  // Hermitian, block_dim x block_dim
};

struct SdpConstraint {
  std::vector<SdpTerm> terms;  // blocks not listed have a zero coefficient
  double rhs = 0.0;
};

class SdpProblem {
 public:
  /// One objective operator per block; block dimensions are taken from them.
  explicit SdpProblem(std::vector<HermitianOperator> objective);

  void add_constraint(SdpConstraint constraint);
  /// Convenience for dense coefficients; exact zeros are dropped.
  void add_constraint(const std::vector<std::pair<int, HermitianOperator>>& terms, double rhs);

  int num_blocks() const { return static_cast<int>(objective_.size()); }
  int block_dim(int block) const { return objective_[block].dim(); }
  const std::vector<HermitianOperator>& objective() const { return objective_; }
  const std::vector<SdpConstraint>& constraints() const { return constraints_; }

 private:
  std::vector<HermitianOperator> objective_;
  std::vector<SdpConstraint> constraints_;
};

enum class SdpStatus { optimal, max_iterations, infeasible_detected };

std::string to_string(SdpStatus status);

struct SdpSolution {
  std::vector<ComplexMatrix> primal_blocks;
  Eigen::VectorXd dual_vector;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;                   // |primal_value - dual_value|
  double primal_infeasibility = 0.0;  // max_i |sum_j Tr[A_ij X_j] - b_i|
  double dual_infeasibility = 0.0;    // max entry of C - A^T y - Z
  int iterations = 0;
  SdpStatus status = SdpStatus::max_iterations;
};

struct SdpOptions {
  int max_iterations = 120;
};

inline constexpr double kDefaultTolerance = 1e-8;

/// tol must lie in [1e-10, 1e-2]. Deterministic for fixed inputs.
SdpSolution solve(const SdpProblem& problem, double tol = kDefaultTolerance,
                  const SdpOptions& options = {});

/// H = A + iB  ->  [[A, -B], [B, A]].
Eigen::MatrixXd complex_to_real_embedding(const HermitianOperator& h);

struct FeasibilityMargin {
  double primal_value = 0.0;
  double residual = 0.0;        // max constraint residual
  double min_eigenvalue = 0.0;  // smallest eigenvalue over primal blocks
  // Filled only when a dual vector is supplied.
  std::optional<double> dual_value;
  std::optional<double> gap;
  std::optional<double> dual_min_eigenvalue;  // of C_j - sum_i y_i A_ij
};

/// Recomputes objective, residuals and eigenvalues of a candidate point from
/// the dense complex data alone.
FeasibilityMargin feasibility_margin(std::span<const ComplexMatrix> blocks,
                                     const SdpProblem& problem,
                                     const std::optional<Eigen::VectorXd>& dual = std::nullopt);

}  // namespace qot
