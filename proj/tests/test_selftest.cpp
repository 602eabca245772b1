#include <doctest.h>

#include "qot/selftest.hpp"

using namespace qot;

TEST_CASE("quick selftest passes") {
  const SelftestResult r = run_selftest({.seed = kDefaultSeed, .quick = true});
  CHECK(r.passed());
  CHECK(r.first_failure() == nullptr);
  CHECK(r.checks.size() >= 10);
  for (const auto& c : r.checks) {
    CHECK_MESSAGE(c.passed, c.name);
    CHECK(c.samples > 0);
  }
  CHECK(format_table(r).find("key-identity") != std::string::npos);
}

TEST_CASE("quick selftest is deterministic") {
  const SelftestResult a = run_selftest({.seed = 5, .quick = true});
  const SelftestResult b = run_selftest({.seed = 5, .quick = true});
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) CHECK(a.checks[i].worst == b.checks[i].worst);
}

TEST_CASE("sign-flipped projector is caught") {
  SelftestOptions opts;
  opts.quick = true;
  opts.projectors.asym = [](int d) { return proj_asym(d) * -1.0; };
  const SelftestResult r = run_selftest(opts);
  CHECK_FALSE(r.passed());
  REQUIRE(r.first_failure() != nullptr);
  CHECK(r.first_failure()->name == "key-identity");
  CHECK(format_table(r).find("FAIL") != std::string::npos);
}

TEST_CASE("wrong reshuffled projector is caught") {
  SelftestOptions opts;
  opts.quick = true;
  opts.projectors.asym_reshuffled = [](int d1, int d2) { return proj_asym(d1 * d2); };
  const SelftestResult r = run_selftest(opts);
  REQUIRE(r.first_failure() != nullptr);
  CHECK(r.first_failure()->name == "key-identity");
}
