#include "qot/io.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

namespace qot {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ParseError("field '" + field + "': " + what);
}

json real_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd read_rows(const json& j, const std::string& field, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array()) fail(field, "expected an array of rows");
  if (static_cast<Eigen::Index>(j.size()) != rows)
    fail(field, "expected " + std::to_string(rows) + " rows, found " + std::to_string(j.size()));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      fail(field, "row " + std::to_string(r) + " must be an array of " + std::to_string(cols) + " numbers");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[c].is_number())
        fail(field, "entry (" + std::to_string(r) + ", " + std::to_string(c) + ") is not a number");
      m(r, c) = row[c].get<double>();
      if (!std::isfinite(m(r, c)))
        fail(field, "entry (" + std::to_string(r) + ", " + std::to_string(c) + ") is not finite");
    }
  }
  return m;
}

const json& require(const json& obj, const std::string& field) {
  auto it = obj.find(field);
  if (it == obj.end()) fail(field, "missing");
  return *it;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

json matrix_json(const ComplexMatrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", real_rows(m.real())}, {"im", real_rows(m.imag())}};
}

ComplexMatrix matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_object()) fail(name, "expected an object");
  const json& rows = require(j, "rows");
  const json& cols = require(j, "cols");
  if (!rows.is_number_integer() || !cols.is_number_integer()) fail(name, "rows/cols must be integers");
  const auto r = rows.get<Eigen::Index>();
  const auto c = cols.get<Eigen::Index>();
  if (r < 0 || c < 0) fail(name, "negative shape");
  ComplexMatrix m(r, c);
  m.real() = read_rows(require(j, "re"), name + ".re", r, c);
  m.imag() = read_rows(require(j, "im"), name + ".im", r, c);
  return m;
}

bool same_matrix(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

ComplexMatrix column(const PureState& psi) { return psi.amplitudes(); }

}  // namespace

std::string to_string(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::hermitian: return "hermitian";
    case MatrixKind::density: return "density";
    case MatrixKind::unitary: return "unitary";
    case MatrixKind::general: return "general";
  }
  return "general";
}

MatrixKind matrix_kind_from_string(const std::string& s) {
  if (s == "hermitian") return MatrixKind::hermitian;
  if (s == "density") return MatrixKind::density;
  if (s == "unitary") return MatrixKind::unitary;
  if (s == "general") return MatrixKind::general;
  fail("kind", "unknown kind \"" + s + "\" (expected hermitian, density, unitary or general)");
}

MatrixFile parse_matrix_file(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw ParseError("matrix file: top level must be an object");

  const json& dim = require(j, "dim");
  if (!dim.is_number_integer() || dim.get<long long>() < 1) fail("dim", "must be a positive integer");
  const auto d = dim.get<Eigen::Index>();

  const json& kind = require(j, "kind");
  if (!kind.is_string()) fail("kind", "must be a string");

  MatrixFile out;
  out.kind = matrix_kind_from_string(kind.get<std::string>());
  out.matrix.resize(d, d);
  out.matrix.real() = read_rows(require(j, "re"), "re", d, d);
  out.matrix.imag() = read_rows(require(j, "im"), "im", d, d);

  try {
    switch (out.kind) {
      case MatrixKind::hermitian:
        (void)HermitianOperator(out.matrix);
        break;
      case MatrixKind::density:
        DensityMatrix::project(HermitianOperator(out.matrix), kFileTol);
        break;
      case MatrixKind::unitary: {
        const double err = (out.matrix.adjoint() * out.matrix - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
        if (err > kFileTol)
          throw InvariantError("unitary: U^dagger U differs from I by " + std::to_string(err));
        break;
      }
      case MatrixKind::general:
        break;
    }
  } catch (const InvariantError& e) {
    throw ParseError("kind '" + to_string(out.kind) + "' invariant violated: " + e.what());
  }
  return out;
}

std::string serialize_matrix_file(const MatrixFile& file) {
  const json j = {{"dim", file.matrix.rows()},
                  {"kind", to_string(file.kind)},
                  {"re", real_rows(file.matrix.real())},
                  {"im", real_rows(file.matrix.imag())}};
  return j.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

MatrixFile load_matrix_file(const std::filesystem::path& path) {
  try {
    return parse_matrix_file(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_matrix_file(const std::filesystem::path& path, const MatrixFile& file) {
  write_file(path, serialize_matrix_file(file));
}

DensityMatrix load_density(const std::filesystem::path& path) {
  const MatrixFile f = load_matrix_file(path);
  if (f.kind != MatrixKind::density)
    throw ParseError(path.string() + ": field 'kind': expected \"density\", found \"" + to_string(f.kind) + "\"");
  return DensityMatrix::project(HermitianOperator(f.matrix), kFileTol);
}

bool ReportFile::operator==(const ReportFile& o) const {
  if (kind != o.kind || tool_version != o.tool_version || generated_at != o.generated_at ||
      inputs != o.inputs || scalars != o.scalars || flags != o.flags || matrices.size() != o.matrices.size())
    return false;
  for (const auto& [name, m] : matrices) {
    auto it = o.matrices.find(name);
    if (it == o.matrices.end() || !same_matrix(m, it->second)) return false;
  }
  return true;
}

std::string serialize_report(const ReportFile& report) {
  json matrices = json::object();
  for (const auto& [name, m] : report.matrices) matrices[name] = matrix_json(m);
  const json j = {{"format", "qot-report"},
                  {"kind", report.kind},
                  {"tool_version", report.tool_version},
                  {"generated_at", report.generated_at},
                  {"inputs", report.inputs},
                  {"scalars", report.scalars},
                  {"flags", report.flags},
                  {"matrices", matrices}};
  return j.dump(2) + "\n";
}

ReportFile parse_report(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object()) throw ParseError("report: top level must be an object");
  const json& format = require(j, "format");
  if (format != "qot-report") fail("format", "expected \"qot-report\"");

  auto string_field = [&](const std::string& name) {
    const json& v = require(j, name);
    if (!v.is_string()) fail(name, "must be a string");
    return v.get<std::string>();
  };

  ReportFile r;
  r.kind = string_field("kind");
  r.tool_version = string_field("tool_version");
  r.generated_at = string_field("generated_at");

  for (const auto& [name, v] : require(j, "inputs").items()) {
    if (!v.is_string()) fail("inputs." + name, "must be a digest string");
    r.inputs[name] = v.get<std::string>();
  }
  for (const auto& [name, v] : require(j, "scalars").items()) {
    if (!v.is_number()) fail("scalars." + name, "must be a number");
    r.scalars[name] = v.get<double>();
  }
  for (const auto& [name, v] : require(j, "flags").items()) {
    if (!v.is_boolean()) fail("flags." + name, "must be true or false");
    r.flags[name] = v.get<bool>();
  }
  for (const auto& [name, v] : require(j, "matrices").items())
    r.matrices[name] = matrix_from_json(v, "matrices." + name);
  return r;
}

void save_report(const std::filesystem::path& path, const ReportFile& report) {
  write_file(path, serialize_report(report));
}

ReportFile load_report(const std::filesystem::path& path) { return parse_report(read_file(path)); }

ReportFile transport_report(const TransportResult& result, const DensityMatrix& rho,
                            const DensityMatrix& sigma, double tol) {
  ReportFile r;
  r.kind = "transport";
  r.generated_at = utc_timestamp();
  r.scalars = {{"value", result.value},
               {"dual_value", dual_value(rho, sigma, result.dual_witness)},
               {"solver_gap", result.gap},
               {"wasserstein", std::sqrt(std::max(0.0, result.value))},
               {"witness_margin", result.dual_witness.feasibility_margin()},
               {"iterations", result.iterations},
               {"dim", rho.dim()},
               {"tol", tol}};
  r.matrices = {{"rho", rho.matrix()},
                {"sigma", sigma.matrix()},
                {"coupling", result.coupling.matrix()},
                {"E", result.dual_witness.e().matrix()},
                {"F", result.dual_witness.f().matrix()}};
  return r;
}

ReportFile stabilized_report(const StabilizedResult& result, double tol) {
  ReportFile r;
  r.kind = "stabilized";
  r.generated_at = utc_timestamp();
  r.scalars = {{"value", result.value},
               {"solver_gap", result.gap},
               {"stabilized_wasserstein", std::sqrt(std::max(0.0, result.value))},
               {"iterations", result.iterations},
               {"tol", tol}};
  r.matrices = {{"X", result.x_block.matrix()}, {"Y", result.y_block.matrix()}};
  return r;
}

ReportFile violation_report_file(const ViolationReport& v) {
  ReportFile r;
  r.kind = "violation";
  r.generated_at = utc_timestamp();
  r.scalars = {{"dim", v.dim},
               {"repair_shift", v.repair_shift},
               {"embedding_alpha", v.embedding_alpha},
               {"t_value", v.t_value},
               {"ts_value", v.ts_value},
               {"gap", v.gap},
               {"sym_violation", v.sym_violation},
               {"witness_margin", v.witness.feasibility_margin()},
               {"psym_expectation", v.psym_expectation},
               {"witness_expectation", v.witness_expectation},
               {"dual_bound", v.dual_bound},
               {"t_solver_gap", v.t_solver_gap},
               {"ts_solver_gap", v.ts_solver_gap},
               {"solver_tol", v.solver_tol},
               {"chain_tol", v.chain_tol}};
  r.flags = {{"claims_violation", v.claims_violation}};
  r.matrices = {{"E", v.witness.e().matrix()},
                {"F", v.witness.f().matrix()},
                {"psi", column(v.psi)},
                {"rho", v.rho.matrix()},
                {"sigma", v.sigma.matrix()}};
  return r;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace qot
