#include <doctest.h>

#include "repvis/propositions.hpp"

using namespace repvis;

TEST_CASE("neutrality claim holds at machine precision") {
  const VerificationReport rep = verify_prop1(SymmetricFamily{}, default_grid());
  CHECK(rep.passed);
  CHECK(rep.max_abs_violation < 1e-12);
  CHECK(rep.n_probes > 0);
}

TEST_CASE("unity identity over seeded draws") {
  const VerificationReport rep = verify_unity_identity(10000, 42);
  CHECK(rep.passed);
  CHECK(rep.max_abs_violation < 1e-12);
  CHECK(rep.n_probes == 10000);
  // Deterministic replay.
  const VerificationReport again = verify_unity_identity(10000, 42);
  CHECK(again.max_abs_violation == rep.max_abs_violation);
}

TEST_CASE("variance and gap closed forms over seeded draws") {
  const VerificationReport rep = verify_variance_forms(10000, 42);
  CHECK(rep.passed);
  CHECK(rep.max_abs_violation < 1e-12);
}

TEST_CASE("reform band: membership holds, quoted zero-side limits do not") {
  const VerificationReport rep = verify_reform_band(ReformFamily{}, default_grid());
  // The failure partial is identically 1 - p_high under a linear value, so
  // membership in [1-p_high, 1-p_low] holds while the quoted pi -> 0 values
  // (1-p_low failure side, p_low success side) are off by the full band
  // width.  The claim reports that discrepancy.
  CHECK(!rep.passed);
  CHECK(rep.max_abs_violation > 0.3);
  REQUIRE(!rep.violations.empty());
  bool zero_side_named = false;
  for (const auto& v : rep.violations) {
    CHECK(v.note.find("limit near pi=0") != std::string::npos);
    if (v.probe < 0.5) zero_side_named = true;
    CHECK(v.lhs != v.rhs);  // both sides of the violated comparison reported
  }
  CHECK(zero_side_named);
  // In-band membership itself never violates.
  for (const auto& v : rep.violations)
    CHECK(v.note.find("band membership") == std::string::npos);
}

TEST_CASE("degenerate technologies are rejected") {
  ReformFamily degenerate;
  CHECK_THROWS_AS(degenerate.tech = OutcomeTech(0.4, 0.4);
                  verify_reform_band(degenerate, default_grid()),
                  std::invalid_argument);
}

TEST_CASE("boundary-limit claim") {
  const VerificationReport rep = verify_boundaries(OutcomeTech(0.8, 0.4));
  CHECK(rep.passed);
}

TEST_CASE("curvature claim") {
  const VerificationReport rep = verify_curvature(ReformFamily{}, {0.0, 1.0}, default_grid());
  CHECK(rep.passed);
  CHECK(rep.n_probes > 0);
}

TEST_CASE("dominance biconditional on the registered example scenarios") {
  const std::vector<double> grid = default_grid();
  const VerificationReport c1 = verify_dominance(dominance_c1_scenario(), grid, "dominance-C1");
  CHECK(c1.passed);
  const VerificationReport c2 = verify_dominance(dominance_c2_scenario(), grid, "dominance-C2");
  CHECK(c2.passed);

  // C1 actually crosses: the condition holds at high reputation and fails at
  // low reputation, so both branches of the biconditional are exercised.
  bool holds_high = false, fails_low = false;
  for (double pi : grid) {
    const bool cond = dominance_map(pi, dominance_c1_scenario()).linear_condition_holds;
    if (pi > 0.9 && cond) holds_high = true;
    if (pi < 0.1 && !cond) fails_low = true;
  }
  CHECK(holds_high);
  CHECK(fails_low);
}

TEST_CASE("claim registry and selectors") {
  const auto ids = registered_claims();
  CHECK(ids.size() == 8);

  const auto all = run_claims("all", 7);
  CHECK(all.size() == ids.size());
  for (std::size_t i = 1; i < all.size(); ++i)
    CHECK(all[i - 1].claim_id < all[i].claim_id);  // deterministic merge order

  const auto one = run_claims("unity", 7);
  REQUIRE(one.size() == 1);
  CHECK(one[0].claim_id == "unity");
  CHECK_THROWS_AS(run_claims("no-such-claim", 7), std::invalid_argument);

  // JSON rendering keeps the verdict and the worst probe.
  const std::string j = to_json(one[0]);
  CHECK(j.find("\"claim_id\": \"unity\"") != std::string::npos);
  CHECK(j.find("max_abs_violation") != std::string::npos);
}
