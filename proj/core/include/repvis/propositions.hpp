#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "repvis/sign_test.hpp"

namespace repvis {

/// One probe of a claim: the two sides of the inequality or identity under
/// test and the measured violation (0 when satisfied).
struct ProbeDetail {
  double probe = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double violation = 0.0;
  std::string note;
};

/// Outcome of one registered claim.  `passed` iff max_abs_violation is within
/// the claim's registered tolerance.  Violating probes are always retained
/// (capped) so a failure names the probe point and both sides.
struct VerificationReport {
  std::string claim_id;
  std::size_t n_probes = 0;
  double tolerance = 0.0;
  double max_abs_violation = 0.0;
  bool passed = false;
  std::vector<ProbeDetail> violations;
  ProbeDetail worst;

  void record(const ProbeDetail& d);
  void finalize() { passed = max_abs_violation <= tolerance; }
};

std::string to_json(const VerificationReport& report);
std::string to_json(const std::vector<VerificationReport>& reports);

/// Symmetric-visibility family: uninformative safe arm, one constant level
/// shared by both outcomes and both arms.
struct SymmetricFamily {
  OutcomeTech tech{0.8, 0.4};
  double sigma_bar = 0.8;
  double safe_success_prob = 0.5;

  Scenario scenario(const ValueFunction& value) const;
};

/// Asymmetric-visibility family used by the reform-band and curvature
/// checks: uninformative safe with constant visibility, risky arm with
/// constant levels (sigma1, sigma0) differentiable in both directions.
struct ReformFamily {
  OutcomeTech tech{0.8, 0.4};
  double sigma_success = 0.8;
  double sigma_failure = 0.2;
  double sigma_bar_safe = 1.0;
  double safe_success_prob = 0.5;

  Scenario scenario(const ValueFunction& value) const;
};

/// Neutrality and curvature-law checks under symmetric constant visibility:
/// (a) linear value: |Delta| and |Delta'| at machine precision on the grid;
/// (b) quadratic value (V'' = +-1): Delta' equals (sigma_bar/2) V'' dVar/dpi
///     against a finite-difference variance slope, and sign(Delta) = sign(V'')
///     at every grid point.
VerificationReport verify_prop1(const SymmetricFamily& family,
                                const std::vector<double>& grid,
                                const NumericSettings& ns = NumericSettings::defaults());

/// |(p_H - p_L)(pi+ - pi-) + p dpi+/dpi + (1-p) dpi-/dpi - 1| on seeded draws.
VerificationReport verify_unity_identity(std::size_t draws, std::uint64_t seed,
                                         const NumericSettings& ns = NumericSettings::defaults());

/// Variance triple identity and the closed-form posterior gap on the same
/// seeded draws as the unity check.
VerificationReport verify_variance_forms(std::size_t draws, std::uint64_t seed,
                                         const NumericSettings& ns = NumericSettings::defaults());

/// Finite-difference d(Delta')/d sigma(0,pi) inside [1-p_H, 1-p_L] on the
/// grid, plus the quoted corollary endpoint values at the boundary probes
/// (failure side 1-p_L / 1-p_H, success side p_L / p_H).  The in-band part
/// holds; the pi -> 0 endpoint values do not match the implemented object,
/// whose failure partial is identically 1-p_H under a linear value (see
/// README), so this claim reports the discrepancy rather than hiding it.
VerificationReport verify_reform_band(const ReformFamily& family,
                                      const std::vector<double>& grid,
                                      const NumericSettings& ns = NumericSettings::defaults());

/// Posterior-map derivative limits at the interior boundary probes:
/// lambda / phi near 0, 1/lambda / 1/phi near 1 (relative 1e-3).
VerificationReport verify_boundaries(const OutcomeTech& tech,
                                     const NumericSettings& ns = NumericSettings::defaults());

/// Wherever |V''| < B(pi)/K(pi), the finite-difference reform effect is
/// strictly positive; the global threshold inf B / sup K gives the uniform
/// version of the same test.
VerificationReport verify_curvature(const ReformFamily& family,
                                    const std::vector<double>& v_curv_values,
                                    const std::vector<double>& grid,
                                    const NumericSettings& ns = NumericSettings::defaults());

/// Exact linear-value biconditional: the per-unit weight condition
/// sS1 aS - sS0 bS >= s1 a - s0 b holds at pi iff Phi(pi) >= Psi(pi).
VerificationReport verify_dominance(const Scenario& scenario,
                                    const std::vector<double>& grid,
                                    const std::string& claim_id,
                                    const NumericSettings& ns = NumericSettings::defaults());

/// Registered default scenarios for the claim registry.
Scenario dominance_c1_scenario();
Scenario dominance_c2_scenario();

/// Claim ids: prop1, unity, variance, band, boundaries, curvature,
/// dominance-C1, dominance-C2.
std::vector<std::string> registered_claims();

/// Runs one claim ("all" for every claim); reports sorted by claim_id.
std::vector<VerificationReport> run_claims(const std::string& selector,
                                           std::uint64_t seed,
                                           const NumericSettings& ns = NumericSettings::defaults());

}  // namespace repvis
