#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <regex>
#include <string>

#include "qot/io.hpp"

using namespace qot;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::string error_of(const std::string& text) {
  try {
    parse_matrix_file(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("matrix file round trip") {
  const MatrixFile files[] = {
      {MatrixKind::hermitian, random_hermitian(3, 1).matrix()},
      {MatrixKind::density, random_density_matrix(4, 2).matrix()},
      {MatrixKind::unitary, random_unitary(3, 3)},
      {MatrixKind::general, ComplexMatrix::Random(2, 2)},
  };
  for (const auto& f : files) {
    const std::string text = serialize_matrix_file(f);
    const MatrixFile back = parse_matrix_file(text);
    CHECK(back.kind == f.kind);
    CHECK((back.matrix.array() == f.matrix.array()).all());
    CHECK(serialize_matrix_file(back) == text);
  }
}

TEST_CASE("matrix file errors name the field") {
  CHECK(error_of(R"({"dim":2,"kind":"density","re":[[1,0],[0,0]],"im":[[0,0,0],[0,0]]})").find("'im'") !=
        std::string::npos);
  CHECK(error_of(R"({"dim":2,"kind":"density","im":[[0,0],[0,0]]})").find("'re'") != std::string::npos);
  CHECK(error_of(R"({"kind":"density","re":[[1]],"im":[[0]]})").find("'dim'") != std::string::npos);
  CHECK(error_of(R"({"dim":0,"kind":"density","re":[],"im":[]})").find("'dim'") != std::string::npos);
  CHECK(error_of(R"({"dim":1,"kind":"spinor","re":[[1]],"im":[[0]]})").find("'kind'") != std::string::npos);
  CHECK(error_of(R"({"dim":1,"kind":"density","re":[["x"]],"im":[[0]]})").find("'re'") != std::string::npos);
  CHECK(error_of(R"({"dim":2,"kind":"density","re":[[1,0]],"im":[[0,0],[0,0]]})").find("'re'") !=
        std::string::npos);
  CHECK_FALSE(error_of("{not json").empty());
  CHECK_FALSE(error_of("[1, 2]").empty());
}

TEST_CASE("matrix file kind invariants") {
  CHECK(error_of(R"({"dim":2,"kind":"density","re":[[0.6,0],[0,0.5]],"im":[[0,0],[0,0]]})").find("trace") !=
        std::string::npos);
  CHECK(error_of(R"({"dim":2,"kind":"density","re":[[1.5,0],[0,-0.5]],"im":[[0,0],[0,0]]})").find("negative") !=
        std::string::npos);
  CHECK(error_of(R"({"dim":2,"kind":"hermitian","re":[[1,0],[0,1]],"im":[[0,1],[0,0]]})").find("anti-Hermitian") !=
        std::string::npos);
  CHECK(error_of(R"({"dim":2,"kind":"unitary","re":[[1,0],[0,2]],"im":[[0,0],[0,0]]})").find("unitary") !=
        std::string::npos);
  // within 1e-8 is accepted
  CHECK(error_of(R"({"dim":2,"kind":"density","re":[[0.500000001,0],[0,0.5]],"im":[[0,0],[0,0]]})").empty());
  CHECK(error_of(R"({"dim":2,"kind":"general","re":[[1,2],[3,4]],"im":[[0,1],[0,0]]})").empty());
}

TEST_CASE("load density from disk") {
  const auto dir = std::filesystem::temp_directory_path() / "qot_test_io";
  std::filesystem::create_directories(dir);
  const DensityMatrix rho = random_density_matrix(3, 9);
  save_matrix_file(dir / "rho.json", {MatrixKind::density, rho.matrix()});
  const DensityMatrix back = load_density(dir / "rho.json");
  CHECK(max_abs_diff(back.matrix(), rho.matrix()) <= 1e-15);

  save_matrix_file(dir / "h.json", {MatrixKind::hermitian, random_hermitian(2, 1).matrix()});
  CHECK_THROWS_AS(load_density(dir / "h.json"), ParseError);
  CHECK_THROWS_AS(load_density(dir / "missing.json"), ParseError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("report round trip is exact") {
  const ReportFile report = violation_report_file(violation_report(4));
  const std::string text = serialize_report(report);
  const ReportFile back = parse_report(text);
  CHECK(back == report);
  for (const auto& [name, value] : report.scalars) CHECK(same_bits(back.scalars.at(name), value));
  CHECK(serialize_report(back) == text);
  CHECK(back.kind == "violation");
  CHECK(back.flags.at("claims_violation"));
  CHECK(back.scalars.at("gap") > 1e-5);
}

TEST_CASE("awkward doubles survive") {
  ReportFile r;
  r.kind = "transport";
  r.generated_at = "2000-01-01T00:00:00Z";
  r.inputs["rho"] = sha256_hex("x");
  const double values[] = {0.1,
                           1.0 / 3.0,
                           std::nextafter(1.0, 2.0),
                           1e-300,
                           std::numeric_limits<double>::denorm_min(),
                           std::numeric_limits<double>::max(),
                           -2.5e-17,
                           6.0221408e23};
  int i = 0;
  for (double v : values) r.scalars["v" + std::to_string(i++)] = v;
  ComplexMatrix m(1, 2);
  m << Complex(0.1, -1.0 / 7.0), Complex(1e-310, 3.0);
  r.matrices["m"] = m;
  const ReportFile back = parse_report(serialize_report(r));
  CHECK(back == r);
  for (const auto& [name, value] : r.scalars) CHECK(same_bits(back.scalars.at(name), value));
}

TEST_CASE("transport report contents") {
  const DensityMatrix rho = random_density_matrix(2, 1);
  const DensityMatrix sigma = random_density_matrix(2, 2);
  const TransportResult t = transport_cost(rho, sigma);
  const ReportFile r = transport_report(t, rho, sigma, 1e-8);
  CHECK(r.kind == "transport");
  CHECK(r.tool_version == kToolVersion);
  CHECK(r.scalars.at("value") == t.value);
  CHECK(std::abs(r.scalars.at("dual_value") - t.value) <= 1e-6);
  CHECK(r.scalars.at("tol") == 1e-8);
  CHECK(r.matrices.count("coupling") == 1);
  CHECK(parse_report(serialize_report(r)) == r);

  const ReportFile s = stabilized_report(stabilized_cost(rho, sigma), 1e-8);
  CHECK(s.kind == "stabilized");
  CHECK(parse_report(serialize_report(s)) == s);
}

TEST_CASE("report parse errors") {
  CHECK_THROWS_AS(parse_report("{}"), ParseError);
  CHECK_THROWS_AS(parse_report(R"({"format":"other"})"), ParseError);
  ReportFile r;
  r.kind = "x";
  std::string text = serialize_report(r);
  text.replace(text.find("\"scalars\": {}"), 13, "\"scalars\": {\"a\": \"b\"}");
  try {
    parse_report(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("scalars.a") != std::string::npos);
  }
}

TEST_CASE("digests and timestamps") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(std::regex_match(utc_timestamp(), std::regex(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)")));
}
