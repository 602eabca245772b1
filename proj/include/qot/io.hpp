#pragma once

// Matrix and report files. Both are JSON documents:
//
//   matrix:  {"dim": 2, "kind": "density", "re": [[...], ...], "im": [[...], ...]}
//   report:  {"format": "qot-report", "kind": ..., "tool_version": ...,
//             "generated_at": ..., "inputs": {name: sha256}, "scalars": {...},
//             "flags": {...}, "matrices": {name: {"dim", "re", "im"}}}
//
// Doubles are written in shortest round-trip form (at most 17 significant
// digits), so parse(serialize(r)) reproduces every scalar exactly.

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "qot/counterexample.hpp"
#include "qot/quantum_core.hpp"
#include "qot/transport.hpp"

namespace qot {

inline constexpr const char* kToolVersion = "qot 1.0.0";
inline constexpr double kFileTol = 1e-8;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MatrixKind { hermitian, density, unitary, general };

std::string to_string(MatrixKind kind);
MatrixKind matrix_kind_from_string(const std::string& s);

struct MatrixFile {
  MatrixKind kind = MatrixKind::general;
  ComplexMatrix matrix;
};

/// Throws ParseError naming the offending field, or the violated invariant of
/// the declared kind (density: PSD and unit trace within 1e-8).
MatrixFile parse_matrix_file(const std::string& text);
std::string serialize_matrix_file(const MatrixFile& file);
MatrixFile load_matrix_file(const std::filesystem::path& path);
void save_matrix_file(const std::filesystem::path& path, const MatrixFile& file);

/// Loads a file of kind "density" as a state.
DensityMatrix load_density(const std::filesystem::path& path);

struct ReportFile {
  std::string kind;
  std::string tool_version = kToolVersion;
  std::string generated_at;
  std::map<std::string, std::string> inputs;  // input name -> sha256 hex digest
  std::map<std::string, double> scalars;
  std::map<std::string, bool> flags;
  std::map<std::string, ComplexMatrix> matrices;

  bool operator==(const ReportFile& o) const;
};

std::string serialize_report(const ReportFile& report);
ReportFile parse_report(const std::string& text);
void save_report(const std::filesystem::path& path, const ReportFile& report);
ReportFile load_report(const std::filesystem::path& path);

ReportFile transport_report(const TransportResult& result, const DensityMatrix& rho,
                            const DensityMatrix& sigma, double tol);
ReportFile stabilized_report(const StabilizedResult& result, double tol);
ReportFile violation_report_file(const ViolationReport& report);

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& path);
/// UTC time in ISO 8601.
std::string utc_timestamp();

}  // namespace qot
