// qot: transport costs, the stabilized cost, the non-monotonicity
// counterexample and a property selftest from the command line.
//
// Exit codes: 0 success, 1 input error, 2 solver failure, 3 chain failure,
// 4 selftest failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qot/counterexample.hpp"
#include "qot/io.hpp"
#include "qot/selftest.hpp"
#include "qot/transport.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kSolverFailure = 2;
constexpr int kChainFailure = 3;
constexpr int kSelftestFailure = 4;

constexpr int kMaxInputDim = 8;

struct Inputs {
  qot::DensityMatrix rho;
  qot::DensityMatrix sigma;
  std::map<std::string, std::string> digests;
};

Inputs load_pair(const std::string& rho_path, const std::string& sigma_path) {
  Inputs in;
  in.rho = qot::load_density(rho_path);
  in.sigma = qot::load_density(sigma_path);
  if (in.rho.dim() != in.sigma.dim())
    throw qot::DimensionError("input dimensions differ: " + std::to_string(in.rho.dim()) + " vs " +
                              std::to_string(in.sigma.dim()));
  if (in.rho.dim() > kMaxInputDim)
    throw qot::DimensionError("input dimension " + std::to_string(in.rho.dim()) + " exceeds " +
                              std::to_string(kMaxInputDim));
  in.digests = {{"rho", qot::sha256_hex(qot::read_file(rho_path))},
                {"sigma", qot::sha256_hex(qot::read_file(sigma_path))}};
  return in;
}

void maybe_write(const std::string& out, const qot::ReportFile& report) {
  if (out.empty()) return;
  qot::save_report(out, report);
  std::printf("report written to %s\n", out.c_str());
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const qot::ParseError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kInputError;
  } catch (const qot::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverFailure;
  } catch (const qot::ChainError& e) {
    std::fprintf(stderr, "chain failure: %s\n", e.what());
    return kChainFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolverFailure;
  }
}

int cmd_transport(const std::string& rho_path, const std::string& sigma_path, double tol, const std::string& out) {
  return guarded([&] {
    const Inputs in = load_pair(rho_path, sigma_path);
    const qot::TransportResult r = qot::transport_cost(in.rho, in.sigma, tol);
    qot::ReportFile report = qot::transport_report(r, in.rho, in.sigma, tol);
    report.inputs = in.digests;
    std::printf("T          = %.12g\n", r.value);
    std::printf("dual value = %.12g\n", report.scalars.at("dual_value"));
    std::printf("gap        = %.3e\n", r.gap);
    std::printf("W          = %.12g\n", report.scalars.at("wasserstein"));
    maybe_write(out, report);
    return kOk;
  });
}

int cmd_stabilized(const std::string& rho_path, const std::string& sigma_path, double tol, bool cross_check,
                   const std::string& out) {
  return guarded([&] {
    const Inputs in = load_pair(rho_path, sigma_path);
    const qot::StabilizedResult r = qot::stabilized_cost(in.rho, in.sigma, tol);
    qot::ReportFile report = qot::stabilized_report(r, tol);
    report.inputs = in.digests;
    std::printf("T_s = %.12g\n", r.value);
    std::printf("gap = %.3e\n", r.gap);
    std::printf("W_s = %.12g\n", report.scalars.at("stabilized_wasserstein"));

    int code = kOk;
    if (cross_check) {
      double via = 0.0;
      try {
        via = qot::stabilized_cost_via_tensoring(in.rho, in.sigma, tol);
      } catch (const qot::DimensionError& e) {
        std::fprintf(stderr, "input error: --cross-check unavailable: %s\n", e.what());
        std::fprintf(stderr, "rerun without --cross-check for the plain solve\n");
        return kInputError;
      }
      const double discrepancy = std::abs(via - r.value);
      report.scalars["cross_check_value"] = via;
      report.scalars["cross_check_discrepancy"] = discrepancy;
      report.flags["cross_check_passed"] = discrepancy <= 2.0 * tol;
      std::printf("T(rho (x) I/2, sigma (x) I/2) = %.12g\n", via);
      std::printf("discrepancy = %.3e (allowed %.3e)\n", discrepancy, 2.0 * tol);
      if (discrepancy > 2.0 * tol) {
        std::fprintf(stderr, "solver failure: cross-check discrepancy exceeds 2 * tol\n");
        code = kSolverFailure;
      }
    }
    maybe_write(out, report);
    return code;
  });
}

int cmd_verify(int dim, double tol, const std::string& out) {
  return guarded([&] {
    std::optional<qot::ViolationReport> report_or;
    try {
      report_or.emplace(qot::violation_report(dim, tol));
    } catch (const qot::SolverError& e) {
      throw qot::ChainError(std::string("solver defect: ") + e.what());
    }
    const qot::ViolationReport& v = *report_or;
    const qot::ReportFile report = qot::violation_report_file(v);
    std::printf("d                                = %d\n", v.dim);
    std::printf("repair shift delta               = %.6g\n", v.repair_shift);
    std::printf("embedding alpha                  = %.6g\n", v.embedding_alpha);
    std::printf("witness P_asym margin            = %.6e\n", v.witness.feasibility_margin());
    std::printf("witness P_sym violation          = %.6e\n", v.sym_violation);
    std::printf("T_s(rho, sigma)                  = %.12g\n", v.ts_value);
    std::printf("<psi|P_sym|psi>                  = %.12g\n", v.psym_expectation);
    std::printf("<psi|E(x)I + I(x)F|psi>          = %.12g\n", v.witness_expectation);
    std::printf("Tr[E rho] + Tr[F sigma]          = %.12g\n", v.dual_bound);
    std::printf("T(rho, sigma)                    = %.12g\n", v.t_value);
    std::printf("T - T_s                          = %.6e\n", v.gap);
    maybe_write(out, report);
    if (!v.claims_violation) {
      std::fprintf(stderr, "chain failure: gap %.3e does not exceed 10 * tol\n", v.gap);
      return kChainFailure;
    }
    std::printf("violation confirmed: tracing out a qubit increased T\n");
    return kOk;
  });
}

int cmd_selftest(std::uint64_t seed, bool quick) {
  qot::SelftestOptions opts;
  opts.seed = seed;
  opts.quick = quick;
  const qot::SelftestResult r = qot::run_selftest(opts);
  std::fputs(qot::format_table(r).c_str(), stdout);
  if (const auto* f = r.first_failure()) {
    std::fprintf(stderr, "selftest failed: %s\n", f->name.c_str());
    return kSelftestFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum optimal transport with the antisymmetric cost"};
  app.require_subcommand(1);

  double tol = qot::kDefaultTolerance;
  std::string out;
  std::uint64_t seed = qot::kDefaultSeed;
  app.add_option("--tol", tol, "solver tolerance")->check(CLI::Range(1e-10, 1e-2))->capture_default_str();
  app.add_option("--seed", seed, "seed for all randomness")->capture_default_str();
  app.add_option("--out", out, "report path (JSON)");

  std::string rho_path, sigma_path;
  auto* transport = app.add_subcommand("transport", "compute T(rho, sigma), its dual bound and W");
  transport->add_option("rho", rho_path)->required()->check(CLI::ExistingFile);
  transport->add_option("sigma", sigma_path)->required()->check(CLI::ExistingFile);

  bool cross_check = false;
  auto* stabilized = app.add_subcommand("stabilized", "compute T_s(rho, sigma)");
  stabilized->add_option("rho", rho_path)->required()->check(CLI::ExistingFile);
  stabilized->add_option("sigma", sigma_path)->required()->check(CLI::ExistingFile);
  stabilized->add_flag("--cross-check", cross_check, "also solve T(rho (x) I/2, sigma (x) I/2)");

  int dim = 4;
  auto* verify = app.add_subcommand("verify-counterexample", "reproduce the non-monotonicity chain");
  verify->add_option("--dim", dim, "dimension, 4 to 6")->required();

  bool quick = false;
  auto* selftest = app.add_subcommand("selftest", "run the property checks");
  selftest->add_flag("--quick", quick, "d <= 3 subset");

  // Global options are accepted after the subcommand name too.
  for (auto* sub : {transport, stabilized, verify, selftest}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  if (*transport) return cmd_transport(rho_path, sigma_path, tol, out);
  if (*stabilized) return cmd_stabilized(rho_path, sigma_path, tol, cross_check, out);
  if (*verify) return cmd_verify(dim, tol, out);
  return cmd_selftest(seed, quick);
}
