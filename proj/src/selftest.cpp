#include "qot/selftest.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "qot/counterexample.hpp"
#include "qot/transport.hpp"

namespace qot {

namespace {

struct Tracker {
  SelftestCheck check;

  Tracker(std::string name, double tol) {
    check.name = std::move(name);
    check.tolerance = tol;
  }
  void record(double error, const std::string& where) {
    ++check.samples;
    if (!(error <= check.worst)) check.worst = std::isnan(error) ? std::numeric_limits<double>::infinity() : error;
    if (!(error <= check.tolerance) && check.detail.empty()) check.detail = where;
  }
  void fail(const std::string& why) {
    if (check.detail.empty()) check.detail = why;
    check.worst = std::numeric_limits<double>::infinity();
  }
  SelftestCheck done() {
    check.passed = check.worst <= check.tolerance && check.detail.empty();
    return check;
  }
};

std::string at(const char* fmt, int a, int b = 0) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

template <class Body>
SelftestCheck run_check(const std::string& name, double tol, Body&& body) {
  Tracker t(name, tol);
  try {
    body(t);
  } catch (const std::exception& e) {
    t.fail(std::string("exception: ") + e.what());
  }
  return t.done();
}

DensityMatrix mix(const DensityMatrix& a, const DensityMatrix& b, double lambda) {
  return DensityMatrix(a.op() * lambda + b.op() * (1.0 - lambda));
}

}  // namespace

bool SelftestResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const SelftestCheck& c) { return c.passed; });
}

const SelftestCheck* SelftestResult::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed) return &c;
  return nullptr;
}

SelftestResult run_selftest(const SelftestOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const bool quick = options.quick;
  const int max_d = quick ? 3 : 4;
  const ProjectorBuilders& pb = options.projectors;
  std::mt19937_64 rng(options.seed);
  SelftestResult out;

  out.checks.push_back(run_check("key-identity", 1e-14, [&](Tracker& t) {
    for (int d1 = 2; d1 <= max_d; ++d1)
      for (int d2 = 2; d2 <= max_d; ++d2) {
        const HermitianOperator lhs = pb.asym_reshuffled(d1, d2);
        const HermitianOperator rhs = tensor(pb.asym(d1), pb.sym(d2)) + tensor(pb.sym(d1), pb.asym(d2));
        t.record(max_abs_diff(lhs.matrix(), rhs.matrix()), at("d1=%d d2=%d", d1, d2));
      }
  }));

  out.checks.push_back(run_check("projector-algebra", 1e-14, [&](Tracker& t) {
    for (int d = 2; d <= (quick ? 3 : 8); ++d) {
      const ComplexMatrix s = pb.sym(d).matrix();
      const ComplexMatrix a = pb.asym(d).matrix();
      const ComplexMatrix id = ComplexMatrix::Identity(d * d, d * d);
      t.record(max_abs_diff(s + a, id), at("P_sym + P_asym != I at d=%d", d));
      t.record(max_abs_diff(s - a, flip_operator(d).matrix()), at("P_sym - P_asym != flip at d=%d", d));
      t.record(max_abs_diff(s * s, s), at("P_sym not idempotent at d=%d", d));
      t.record(max_abs_diff(a * a, a), at("P_asym not idempotent at d=%d", d));
    }
  }));

  out.checks.push_back(run_check("twirl", 1e-10, [&](Tracker& t) {
    for (int i = 0; i < 20; ++i) {
      const int d = 2 + i % (max_d - 1);
      const HermitianOperator x = random_hermitian(d * d, rng());
      const ComplexMatrix u = random_unitary(d, rng());
      const ComplexMatrix uu = tensor(u, u);
      const HermitianOperator tx = twirl(x);
      t.record(max_abs_diff(twirl(tx).matrix(), tx.matrix()), at("idempotence, sample %d", i));
      t.record(std::abs((tx.matrix().trace() - x.matrix().trace())), at("trace, sample %d", i));
      const HermitianOperator rotated(ComplexMatrix(uu * x.matrix() * uu.adjoint()));
      t.record(max_abs_diff(twirl(rotated).matrix(), tx.matrix()), at("U(x)U commutation, sample %d", i));
    }
  }));

  out.checks.push_back(run_check("partial-trace", 1e-12, [&](Tracker& t) {
    for (int i = 0; i < 10; ++i) {
      const int d1 = 2 + i % (max_d - 1);
      const int d2 = 2 + (i / 2) % (max_d - 1);
      const DensityMatrix a = random_density_matrix(d1, rng());
      const DensityMatrix b = random_density_matrix(d2, rng());
      const DensityMatrix ab = tensor(a, b);
      const std::array<int, 2> dims{d1, d2};
      const std::array<int, 1> first{0};
      const std::array<int, 1> second{1};
      t.record(max_abs_diff(partial_trace(ab, dims, first).matrix(), a.matrix()), at("Tr_B, sample %d", i));
      t.record(max_abs_diff(partial_trace(ab, dims, second).matrix(), b.matrix()), at("Tr_A, sample %d", i));
    }
  }));

  out.checks.push_back(run_check("lemma31-equivalence", 1e-9, [&](Tracker& t) {
    std::uniform_real_distribution<double> offset(-0.3, 0.3);
    for (int d1 = 2; d1 <= 3; ++d1)
      for (int i = 0; i < (quick ? 20 : 50); ++i) {
        const HermitianOperator e0 = random_hermitian(d1, rng()) * 0.3;
        const HermitianOperator f = random_hermitian(d1, rng()) * 0.3;
        const double shift = max_eigenvalue(witness_operator(e0, f) - pb.asym(d1)) + offset(rng);
        const HermitianOperator e = e0 - HermitianOperator::identity(d1) * shift;
        const Lemma31Check c = check_lemma31(e, f, 2);
        t.record(std::abs(c.margin_tensored - std::max(c.margin_asym, c.margin_sym)),
                 at("margin identity, d1=%d sample %d", d1, i));
        if (c.conclusive && !c.consistent) t.fail(at("boolean equivalence fails, d1=%d sample %d", d1, i));
      }
  }));

  out.checks.push_back(run_check("strong-duality", 1e-6, [&](Tracker& t) {
    for (int d = 2; d <= max_d; ++d)
      for (int i = 0; i < (quick ? 5 : 20); ++i) {
        const DensityMatrix rho = random_density_matrix(d, rng());
        const DensityMatrix sigma = random_density_matrix(d, rng());
        const TransportResult r = transport_cost(rho, sigma);
        t.record(std::abs(r.value - dual_value(rho, sigma, r.dual_witness)), at("d=%d sample %d", d, i));
      }
  }));

  out.checks.push_back(run_check("pure-state-closed-form", 1e-7, [&](Tracker& t) {
    for (int d = 2; d <= max_d; ++d)
      for (int i = 0; i < (quick ? 5 : 20); ++i) {
        const PureState psi = random_pure_state(d, rng());
        const PureState phi = random_pure_state(d, rng());
        const double overlap = std::norm(psi.amplitudes().dot(phi.amplitudes()));
        const double value = transport_cost(psi.projector(), phi.projector()).value;
        t.record(std::abs(value - (1.0 - overlap) / 2.0), at("d=%d sample %d", d, i));
      }
  }));

  out.checks.push_back(run_check("symmetry-and-bounds", 1e-7, [&](Tracker& t) {
    for (int i = 0; i < 6; ++i) {
      const int d = 2 + i % (max_d - 1);
      const DensityMatrix rho = random_density_matrix(d, rng());
      const DensityMatrix sigma = random_density_matrix(d, rng());
      const double ab = transport_cost(rho, sigma).value;
      const double ba = transport_cost(sigma, rho).value;
      const double ts = stabilized_cost(rho, sigma).value;
      t.record(std::abs(ab - ba), at("T(a,b) != T(b,a), sample %d", i));
      t.record(std::max({-ts - 1e-9, ts - ab - 1e-9, ab - 0.5 - 1e-9, 0.0}),
               at("0 <= T_s <= T <= 1/2 fails, sample %d", i));
    }
  }));

  out.checks.push_back(run_check("unitary-invariance", 1e-6, [&](Tracker& t) {
    for (int i = 0; i < (quick ? 4 : 8); ++i) {
      const int d = 2 + i % (max_d - 1);
      const DensityMatrix rho = random_density_matrix(d, rng());
      const DensityMatrix sigma = random_density_matrix(d, rng());
      const ComplexMatrix u = random_unitary(d, rng());
      const DensityMatrix ur = conjugate(u, rho);
      const DensityMatrix us = conjugate(u, sigma);
      t.record(std::abs(transport_cost(ur, us).value - transport_cost(rho, sigma).value), at("T, sample %d", i));
      t.record(std::abs(stabilized_cost(ur, us).value - stabilized_cost(rho, sigma).value),
               at("T_s, sample %d", i));
    }
  }));

  out.checks.push_back(run_check("joint-convexity", 1e-6, [&](Tracker& t) {
    for (int i = 0; i < (quick ? 2 : 4); ++i) {
      const int d = 2 + i % (max_d - 1);
      const DensityMatrix r1 = random_density_matrix(d, rng());
      const DensityMatrix s1 = random_density_matrix(d, rng());
      const DensityMatrix r2 = random_density_matrix(d, rng());
      const DensityMatrix s2 = random_density_matrix(d, rng());
      const double t1 = transport_cost(r1, s1).value;
      const double t2 = transport_cost(r2, s2).value;
      const double ts1 = stabilized_cost(r1, s1).value;
      const double ts2 = stabilized_cost(r2, s2).value;
      for (double lambda : {0.25, 0.5, 0.75}) {
        const DensityMatrix r = mix(r1, r2, lambda);
        const DensityMatrix s = mix(s1, s2, lambda);
        t.record(transport_cost(r, s).value - (lambda * t1 + (1 - lambda) * t2), at("T, sample %d", i));
        t.record(stabilized_cost(r, s).value - (lambda * ts1 + (1 - lambda) * ts2), at("T_s, sample %d", i));
      }
    }
  }));

  out.checks.push_back(run_check("tensoring-monotonicity", 1e-6, [&](Tracker& t) {
    for (int i = 0; i < (quick ? 3 : 6); ++i) {
      const int d = 2 + i % 2;
      const DensityMatrix rho = random_density_matrix(d, rng());
      const DensityMatrix sigma = random_density_matrix(d, rng());
      const DensityMatrix gamma = random_density_matrix(2, rng());
      const double tg = transport_cost(tensor(rho, gamma), tensor(sigma, gamma)).value;
      t.record(tg - transport_cost(rho, sigma).value, at("d=%d sample %d", d, i));
    }
  }));

  out.checks.push_back(run_check("stabilized-tensor-invariance", 1e-6, [&](Tracker& t) {
    for (int i = 0; i < (quick ? 3 : 6); ++i) {
      const DensityMatrix rho = random_density_matrix(2, rng());
      const DensityMatrix sigma = random_density_matrix(2, rng());
      const DensityMatrix gamma = random_density_matrix(2, rng());
      const double tg = stabilized_cost(tensor(rho, gamma), tensor(sigma, gamma)).value;
      t.record(std::abs(tg - stabilized_cost(rho, sigma).value), at("sample %d", i));
    }
  }));

  out.checks.push_back(run_check("stabilized-channel-monotonicity", 1e-6, [&](Tracker& t) {
    std::uniform_int_distribution<int> dim(2, max_d);
    std::uniform_int_distribution<int> ops(1, 3);
    for (int i = 0; i < (quick ? 8 : 20); ++i) {
      const int din = dim(rng);
      const int dout = dim(rng);
      const int n = std::max(ops(rng), (din + dout - 1) / dout);
      const KrausChannel ch = random_kraus_channel(din, dout, n, rng());
      const DensityMatrix rho = random_density_matrix(din, rng());
      const DensityMatrix sigma = random_density_matrix(din, rng());
      const double after = stabilized_cost(apply_channel(ch, rho), apply_channel(ch, sigma)).value;
      t.record(after - stabilized_cost(rho, sigma).value, at("din=%d dout=%d", din, dout));
    }
  }));

  out.checks.push_back(run_check("stabilized-cross-check", 2e-8, [&](Tracker& t) {
    for (int i = 0; i < (quick ? 3 : 10); ++i) {
      const int d = quick ? 2 + i % 2 : 3;
      const DensityMatrix rho = random_density_matrix(d, rng());
      const DensityMatrix sigma = random_density_matrix(d, rng());
      t.record(std::abs(stabilized_cost(rho, sigma).value - stabilized_cost_via_tensoring(rho, sigma)),
               at("d=%d sample %d", d, i));
    }
  }));

  if (!quick) {
    out.checks.push_back(run_check("paper-witness", 1e-6, [&](Tracker& t) {
      const RepairedWitness w = repair_witness(paper_e(), paper_f());
      t.record(-w.witness.feasibility_margin(), "P_asym feasibility");
      const double v = sym_violation(w.witness);
      if (!(v > 1e-4)) t.fail("P_sym violation " + std::to_string(v) + " not above 1e-4");
    }));

    out.checks.push_back(run_check("counterexample", 0.0, [&](Tracker& t) {
      const ViolationReport r = violation_report(4);
      t.record(r.gap > 1e-5 ? 0.0 : 1e-5 - r.gap, "T - T_s not above 1e-5");
    }));
  }

  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string format_table(const SelftestResult& result) {
  std::string s;
  char line[256];
  std::snprintf(line, sizeof line, "%-34s %-6s %8s %12s %12s\n", "check", "result", "samples", "worst", "tolerance");
  s += line;
  for (const auto& c : result.checks) {
    std::snprintf(line, sizeof line, "%-34s %-6s %8d %12.3e %12.3e\n", c.name.c_str(), c.passed ? "PASS" : "FAIL",
                  c.samples, c.worst, c.tolerance);
    s += line;
    if (!c.passed && !c.detail.empty()) s += "    " + c.detail + "\n";
  }
  std::snprintf(line, sizeof line, "%zu checks, %.1f s\n", result.checks.size(), result.seconds);
  s += line;
  return s;
}

}  // namespace qot
