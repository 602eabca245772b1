#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qot/io.hpp"

using namespace qot;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string output;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / "qot_test_cli";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

Run run(const std::string& args) {
  const fs::path log = scratch() / "log.txt";
  const std::string cmd = std::string(QOT_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(log)};
}

std::string write_state(const std::string& name, const ComplexMatrix& m) {
  const fs::path p = scratch() / name;
  save_matrix_file(p, {MatrixKind::density, m});
  return p.string();
}

std::string without_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("\"generated_at\"") == std::string::npos) out += line + "\n";
  return out;
}

}  // namespace

TEST_CASE("transport subcommand") {
  const std::string zero = write_state("zero.json", DensityMatrix::basis_state(2, 0).matrix());
  const std::string one = write_state("one.json", DensityMatrix::basis_state(2, 1).matrix());
  const std::string out = (scratch() / "t.json").string();

  Run r = run("transport " + zero + " " + zero + " --out " + out);
  CHECK(r.code == 0);
  CHECK(std::abs(load_report(out).scalars.at("value")) <= 1e-8);

  r = run("transport " + zero + " " + one + " --tol 1e-8 --out " + out);
  CHECK(r.code == 0);
  const ReportFile rep = load_report(out);
  CHECK(std::abs(rep.scalars.at("value") - 0.5) <= 1e-6);
  CHECK(rep.inputs.at("rho") == sha256_hex(read_file(zero)));
  CHECK(r.output.find("dual value") != std::string::npos);
  CHECK(r.output.find("gap") != std::string::npos);

  const fs::path bad = scratch() / "bad.json";
  std::ofstream(bad) << R"({"dim":2,"kind":"density","re":[[1,0],[0,0]],"im":[[0,0,0],[0,0]]})";
  r = run("transport " + zero + " " + bad.string());
  CHECK(r.code == 1);
  CHECK(r.output.find("'im'") != std::string::npos);

  const std::string big = write_state("big.json", DensityMatrix::maximally_mixed(9).matrix());
  CHECK(run("transport " + big + " " + big).code == 1);
  const std::string three = write_state("three.json", DensityMatrix::maximally_mixed(3).matrix());
  CHECK(run("transport " + zero + " " + three).code == 1);
}

TEST_CASE("stabilized subcommand") {
  const std::string rho = write_state("r3.json", random_density_matrix(3, 1).matrix());
  const std::string sigma = write_state("s3.json", random_density_matrix(3, 2).matrix());
  const std::string out = (scratch() / "s.json").string();

  CHECK(run("stabilized " + rho + " " + rho).code == 0);

  Run r = run("stabilized " + rho + " " + sigma + " --cross-check --tol 1e-8 --out " + out);
  CHECK(r.code == 0);
  const ReportFile rep = load_report(out);
  CHECK(rep.scalars.at("cross_check_discrepancy") <= 2e-8);
  CHECK(rep.flags.at("cross_check_passed"));
  CHECK(r.output.find("discrepancy") != std::string::npos);

  const std::string big = write_state("r8.json", random_density_matrix(8, 3).matrix());
  const std::string big2 = write_state("s8.json", random_density_matrix(8, 4).matrix());
  r = run("stabilized " + big + " " + big2 + " --cross-check");
  CHECK(r.code == 1);
  CHECK(r.output.find("without --cross-check") != std::string::npos);
  CHECK(run("stabilized " + big + " " + big2).code == 0);
}

TEST_CASE("verify-counterexample subcommand") {
  const std::string out = (scratch() / "v.json").string();
  Run r = run("verify-counterexample --dim 4 --out " + out);
  CHECK(r.code == 0);
  const ReportFile rep = load_report(out);
  CHECK(rep.kind == "violation");
  CHECK(rep.scalars.at("gap") > 0.0);
  CHECK(rep.scalars.at("solver_tol") == 1e-8);

  r = run("verify-counterexample --dim 3");
  CHECK(r.code == 1);
  CHECK(r.output.find("open question") != std::string::npos);
  CHECK(run("verify-counterexample --dim 5").code == 0);
  CHECK(run("verify-counterexample --dim 9").code == 1);
  CHECK(run("verify-counterexample").code == 1);

  // A tolerance too loose for the 10 * tol margin fails the chain.
  CHECK(run("verify-counterexample --dim 4 --tol 1e-2").code == 3);
}

TEST_CASE("reports are reproducible apart from the timestamp") {
  const std::string a = (scratch() / "a.json").string();
  const std::string b = (scratch() / "b.json").string();
  REQUIRE(run("verify-counterexample --dim 4 --out " + a).code == 0);
  REQUIRE(run("verify-counterexample --dim 4 --out " + b).code == 0);
  CHECK(without_timestamp(read_file(a)) == without_timestamp(read_file(b)));
}

TEST_CASE("selftest subcommand") {
  const Run r = run("selftest --quick --seed 11");
  CHECK(r.code == 0);
  CHECK(r.output.find("key-identity") != std::string::npos);
  CHECK(r.output.find("FAIL") == std::string::npos);
}

TEST_CASE("argument errors") {
  CHECK(run("").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("selftest --tol 1").code == 1);
  CHECK(run("transport /nonexistent/a.json /nonexistent/b.json").code == 1);
  CHECK(run("--help").code == 0);
}
