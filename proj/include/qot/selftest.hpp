#pragma once

// Property checks over the whole library, run by `qot selftest`.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qot/quantum_core.hpp"

namespace qot {

inline constexpr std::uint64_t kDefaultSeed = 20240607;

/// Projector constructors used by the structural checks. Replaceable so a
/// test can confirm that a broken projector is caught.
struct ProjectorBuilders {
  std::function<HermitianOperator(int)> sym = proj_sym;
  std::function<HermitianOperator(int)> asym = proj_asym;
  std::function<HermitianOperator(int, int)> asym_reshuffled = proj_asym_reshuffled;
};

struct SelftestOptions {
  std::uint64_t seed = kDefaultSeed;
  bool quick = false;  // d <= 3 only, fewer samples
  ProjectorBuilders projectors;
};

struct SelftestCheck {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest observed error
  double tolerance = 0.0;  // allowed error
  int samples = 0;
  std::string detail;      // set on failure
};

struct SelftestResult {
  std::vector<SelftestCheck> checks;
  double seconds = 0.0;

  bool passed() const;
  const SelftestCheck* first_failure() const;
};

SelftestResult run_selftest(const SelftestOptions& options = {});

std::string format_table(const SelftestResult& result);

}  // namespace qot
