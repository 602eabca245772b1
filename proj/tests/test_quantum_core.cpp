#include <doctest.h>

#include <array>
#include <cmath>

#include "qot/counterexample.hpp"
#include "qot/quantum_core.hpp"

using namespace qot;

namespace {

ComplexMatrix diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.cast<Complex>().asDiagonal();
}

// Written out entry by entry, independent of flip_operator.
ComplexMatrix hand_psym2() {
  ComplexMatrix p = ComplexMatrix::Zero(4, 4);
  p(0, 0) = 1.0;
  p(3, 3) = 1.0;
  p(1, 1) = p(2, 2) = p(1, 2) = p(2, 1) = 0.5;
  return p;
}

ComplexMatrix hand_singlet_projector() {
  ComplexMatrix p = ComplexMatrix::Zero(4, 4);
  p(1, 1) = p(2, 2) = 0.5;
  p(1, 2) = p(2, 1) = -0.5;
  return p;
}

PureState phi_plus() {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return PureState(v);
}

}  // namespace

TEST_CASE("tensor products") {
  CHECK(max_abs_diff(tensor(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2)),
                     ComplexMatrix::Identity(4, 4)) == 0.0);
  CHECK(max_abs_diff(tensor(diag({1, 0}), diag({0, 1})), diag({0, 1, 0, 0})) == 0.0);

  const ComplexMatrix big = tensor(paper_e().matrix(), ComplexMatrix::Identity(4, 4));
  const std::array<double, 4> e{-1.37, 0.02, 0.17, 0.26};
  for (int i = 0; i < 16; ++i) CHECK(big(i, i) == Complex(e[i / 4]));
  CHECK((big - ComplexMatrix(big.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("flip operator") {
  CHECK(flip_operator(1).matrix()(0, 0) == Complex(1.0));
  const ComplexMatrix f2 = flip_operator(2).matrix();
  CHECK(f2(0, 0) == Complex(1.0));
  CHECK(f2(3, 3) == Complex(1.0));
  CHECK(f2(1, 2) == Complex(1.0));
  CHECK(f2(2, 1) == Complex(1.0));
  CHECK(f2(1, 1) == Complex(0.0));
  for (int d = 1; d <= 6; ++d) {
    const ComplexMatrix f = flip_operator(d).matrix();
    CHECK(max_abs_diff(f * f, ComplexMatrix::Identity(d * d, d * d)) == 0.0);
    CHECK(max_abs_diff(f * proj_sym(d).matrix() * f, proj_sym(d).matrix()) <= 1e-15);
    CHECK(max_abs_diff(f * proj_asym(d).matrix() * f, proj_asym(d).matrix()) <= 1e-15);
  }
  // |a>|b> -> |b>|a> on basis vectors
  const int d = 3;
  const ComplexMatrix f = flip_operator(d).matrix();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) CHECK(f(b * d + a, a * d + b) == Complex(1.0));
}

TEST_CASE("symmetric and antisymmetric projectors") {
  CHECK(max_abs_diff(proj_asym(2).matrix(), hand_singlet_projector()) == 0.0);
  CHECK(max_abs_diff(proj_sym(2).matrix(), hand_psym2()) == 0.0);
  CHECK(proj_asym(4).matrix().trace().real() == doctest::Approx(6.0));
  for (int d = 1; d <= 8; ++d) {
    const ComplexMatrix s = proj_sym(d).matrix();
    const ComplexMatrix a = proj_asym(d).matrix();
    CHECK(max_abs_diff(s + a, ComplexMatrix::Identity(d * d, d * d)) <= 1e-15);
    CHECK(max_abs_diff(s * a, ComplexMatrix::Zero(d * d, d * d)) <= 1e-15);
    CHECK(std::abs(a.trace().real() - d * (d - 1) / 2.0) <= 1e-12);
    CHECK(std::abs(s.trace().real() - d * (d + 1) / 2.0) <= 1e-12);
    CHECK(max_abs_diff(a * a, a) <= 1e-15);
  }
}

TEST_CASE("reshuffled projector") {
  for (int d1 = 1; d1 <= 4; ++d1)
    for (int d2 = 1; d2 <= 4; ++d2) {
      const ComplexMatrix lhs = proj_asym_reshuffled(d1, d2).matrix();
      const ComplexMatrix rhs =
          tensor(proj_asym(d1), proj_sym(d2)).matrix() + tensor(proj_sym(d1), proj_asym(d2)).matrix();
      CHECK(max_abs_diff(lhs, rhs) <= 1e-14);
    }
  CHECK(max_abs_diff(proj_asym_reshuffled(3, 1).matrix(), proj_asym(3).matrix()) == 0.0);
  CHECK(proj_asym_reshuffled(2, 2).matrix().trace().real() == doctest::Approx(6.0));
}

TEST_CASE("partial trace") {
  const std::array<int, 2> dims{2, 2};
  const std::array<int, 1> a{0};
  const std::array<int, 1> b{1};
  const DensityMatrix bell = phi_plus().projector();
  CHECK(max_abs_diff(partial_trace(bell, dims, a).matrix(), ComplexMatrix::Identity(2, 2) / 2.0) <= 1e-15);

  const DensityMatrix rho = random_density_matrix(3, 1);
  const DensityMatrix sigma = random_density_matrix(2, 2);
  const std::array<int, 2> dims32{3, 2};
  CHECK(max_abs_diff(partial_trace(tensor(rho, sigma), dims32, a).matrix(), rho.matrix()) <= 1e-14);
  CHECK(max_abs_diff(partial_trace(tensor(rho, sigma), dims32, b).matrix(), sigma.matrix()) <= 1e-14);

  // Unnormalized operator: Tr_B(x (x) y) = x Tr[y].
  const ComplexMatrix x = random_hermitian(2, 3).matrix();
  const ComplexMatrix y = random_hermitian(3, 4).matrix();
  const std::array<int, 2> dims23{2, 3};
  CHECK(max_abs_diff(partial_trace(tensor(x, y), dims23, a), x * y.trace()) <= 1e-13);

  const ComplexMatrix z = random_hermitian(12, 5).matrix();
  const std::array<int, 3> dims3{2, 3, 2};
  const std::array<int, 0> none{};
  const ComplexMatrix full = partial_trace(z, dims3, none);
  CHECK(full.rows() == 1);
  CHECK(std::abs(full(0, 0) - z.trace()) <= 1e-12);
  const std::array<int, 2> keep02{0, 2};
  CHECK(std::abs(partial_trace(z, dims3, keep02).trace() - z.trace()) <= 1e-12);

  const std::array<int, 2> wrong{3, 3};
  CHECK_THROWS_AS(partial_trace(z, wrong, a), DimensionError);
}

TEST_CASE("twirl") {
  // Direct arithmetic on the 4 x 4 matrices: <Phi+|P_sym|Phi+> = 1 and
  // <Phi+|P_asym|Phi+> = 0, so the image is P_sym / Tr[P_sym] = P_sym / 3.
  const HermitianOperator t = twirl(phi_plus().projector().op());
  CHECK(max_abs_diff(t.matrix(), hand_psym2() / 3.0) <= 1e-15);

  for (int d = 2; d <= 4; ++d) {
    CHECK(max_abs_diff(twirl(proj_asym(d)).matrix(), proj_asym(d).matrix()) <= 1e-14);
    CHECK(max_abs_diff(twirl(HermitianOperator::identity(d * d)).matrix(),
                       ComplexMatrix::Identity(d * d, d * d)) <= 1e-14);
  }
  for (int i = 0; i < 20; ++i) {
    const int d = 2 + i % 3;
    const HermitianOperator x = random_hermitian(d * d, 100 + i);
    const ComplexMatrix u = random_unitary(d, 200 + i);
    const ComplexMatrix uu = tensor(u, u);
    const HermitianOperator tx = twirl(x);
    CHECK(max_abs_diff(twirl(tx).matrix(), tx.matrix()) <= 1e-12);
    CHECK(std::abs(tx.matrix().trace() - x.matrix().trace()) <= 1e-12);
    CHECK(max_abs_diff(tx.matrix() * uu, uu * tx.matrix()) <= 1e-10);
  }
  CHECK_THROWS_AS(twirl(HermitianOperator::identity(3)), DimensionError);
}

TEST_CASE("channels") {
  const DensityMatrix rho = random_density_matrix(3, 7);
  CHECK(max_abs_diff(apply_channel(KrausChannel::identity(3), rho).matrix(), rho.matrix()) <= 1e-15);
  CHECK(max_abs_diff(apply_channel(KrausChannel::completely_depolarizing(3, 2), rho).matrix(),
                     ComplexMatrix::Identity(2, 2) / 2.0) <= 1e-14);
  const DensityMatrix gamma = random_density_matrix(2, 8);
  CHECK(max_abs_diff(apply_channel(KrausChannel::partial_trace(3, 2, 1), tensor(rho, gamma)).matrix(),
                     rho.matrix()) <= 1e-14);
  CHECK(max_abs_diff(apply_channel(KrausChannel::partial_trace(3, 2, 0), tensor(rho, gamma)).matrix(),
                     gamma.matrix()) <= 1e-14);

  for (int i = 0; i < 10; ++i) {
    const KrausChannel ch = random_kraus_channel(3, 2, 3, 50 + i);
    ComplexMatrix sum = ComplexMatrix::Zero(3, 3);
    for (const auto& k : ch.kraus_ops()) sum += k.adjoint() * k;
    CHECK(max_abs_diff(sum, ComplexMatrix::Identity(3, 3)) <= 1e-12);
    const DensityMatrix out = apply_channel(ch, random_density_matrix(3, 60 + i));
    CHECK(out.dim() == 2);
    CHECK(min_eigenvalue(out.op()) >= -1e-12);
  }
  CHECK_THROWS_AS(apply_channel(KrausChannel::identity(2), rho), DimensionError);
  CHECK_THROWS(KrausChannel(2, 2, {ComplexMatrix::Identity(2, 2) * 2.0}));
}

TEST_CASE("random instances") {
  const DensityMatrix rho = random_density_matrix(3, 11);
  CHECK(min_eigenvalue(rho.op()) >= 0.0);
  CHECK(std::abs(rho.matrix().trace().real() - 1.0) <= 1e-14);
  const ComplexMatrix u = random_unitary(4, 12);
  CHECK(max_abs_diff(u.adjoint() * u, ComplexMatrix::Identity(4, 4)) <= 1e-12);
  CHECK(max_abs_diff(random_density_matrix(3, 11).matrix(), rho.matrix()) == 0.0);
  CHECK(max_abs_diff(random_unitary(4, 12), u) == 0.0);
  CHECK(random_pure_state(5, 13).amplitudes() == random_pure_state(5, 13).amplitudes());
  CHECK(std::abs(random_pure_state(5, 13).amplitudes().norm() - 1.0) <= 1e-14);
  CHECK(max_abs_diff(random_density_matrix(3, 11).matrix(), random_density_matrix(3, 14).matrix()) > 0.0);
}

TEST_CASE("max eigenpair") {
  const EigenPair s = max_eig(proj_asym(2));
  CHECK(s.value == doctest::Approx(1.0));
  const ComplexVector singlet = (ComplexVector(4) << 0, 1, -1, 0).finished() / std::sqrt(2.0);
  CHECK(std::abs(std::abs(singlet.dot(s.vector.amplitudes())) - 1.0) <= 1e-12);

  const EigenPair e = max_eig(paper_e());
  CHECK(e.value == doctest::Approx(0.26).epsilon(1e-14));
  CHECK(std::abs(std::abs(e.vector.amplitudes()(3)) - 1.0) <= 1e-12);

  const EigenPair id = max_eig(HermitianOperator::identity(5));
  CHECK(id.value == doctest::Approx(1.0));

  for (int i = 0; i < 5; ++i) {
    const HermitianOperator h = random_hermitian(16, 30 + i);
    const EigenPair p = max_eig(h);
    CHECK((h.matrix() * p.vector.amplitudes() - p.value * p.vector.amplitudes()).norm() <= 1e-10);
  }
}

TEST_CASE("type invariants") {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = Complex(0, 1e-3);
  CHECK_THROWS_AS(HermitianOperator{m}, InvariantError);
  m(0, 1) = Complex(1e-10, 0);
  CHECK(HermitianOperator(m).matrix()(0, 1) == HermitianOperator(m).matrix()(1, 0));
  CHECK_THROWS_AS(HermitianOperator(ComplexMatrix::Zero(2, 3)), DimensionError);

  CHECK_THROWS_AS(DensityMatrix(HermitianOperator(diag({1.5, -0.5}))), InvariantError);
  CHECK_THROWS_AS(DensityMatrix(HermitianOperator(diag({0.5, 0.4}))), InvariantError);
  CHECK_THROWS_AS(PureState(ComplexVector::Ones(2)), InvariantError);

  const DensityMatrix p = DensityMatrix::project(HermitianOperator(diag({1.0 + 1e-9, -1e-9})), 1e-8);
  CHECK(min_eigenvalue(p.op()) >= 0.0);
  CHECK(std::abs(p.matrix().trace().real() - 1.0) <= 1e-15);
}

TEST_CASE("hermitian basis") {
  for (int d = 1; d <= 4; ++d) {
    const auto basis = hermitian_basis(d);
    REQUIRE(static_cast<int>(basis.size()) == d * d);
    CHECK(max_abs_diff(basis[0].matrix(), ComplexMatrix::Identity(d, d) / std::sqrt(double(d))) <= 1e-15);
    for (int i = 0; i < d * d; ++i)
      for (int j = 0; j < d * d; ++j)
        CHECK(std::abs(trace_product(basis[i], basis[j]) - (i == j ? 1.0 : 0.0)) <= 1e-14);
  }
}
