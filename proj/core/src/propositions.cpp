#include "repvis/propositions.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "repvis/rng.hpp"
#include "repvis/util.hpp"

namespace repvis {

namespace {

constexpr std::size_t kMaxStoredViolations = 50;

SignalTech neutral_signal() { return SignalTech(0.6, 0.4); }

/// Seeded draw of (p_high, p_low, pi) with an informative gap.
struct TechDraw {
  OutcomeTech tech;
  double pi;
};

TechDraw draw_tech(CounterRng& rng) {
  const double a = rng.uniform(0.02, 0.98);
  const double b = rng.uniform(0.02, 0.98);
  double lo = std::min(a, b), hi = std::max(a, b);
  if (hi - lo < 1e-3) {  // keep the arm informative
    lo = std::max(0.02, lo - 1e-3);
    hi = std::min(0.98, hi + 1e-3);
  }
  return {OutcomeTech(hi, lo), rng.uniform(0.01, 0.99)};
}

double fd_reform_effect(const ReformFamily& family, const ValueFunction& value,
                        double pi, bool failure_side, const NumericSettings& ns) {
  const double h = ns.kernel_fd_step;
  auto slope_at = [&](double bump) {
    ReformFamily f = family;
    (failure_side ? f.sigma_failure : f.sigma_success) += bump;
    return delta_prime_exact(pi, f.scenario(value), ns);
  };
  return (slope_at(h) - slope_at(-h)) / (2.0 * h);
}

}  // namespace

void VerificationReport::record(const ProbeDetail& d) {
  ++n_probes;
  if (d.violation > max_abs_violation) {
    max_abs_violation = d.violation;
    worst = d;
  }
  if (d.violation > tolerance && violations.size() < kMaxStoredViolations)
    violations.push_back(d);
}

std::string to_json(const VerificationReport& report) {
  nlohmann::json j;
  j["claim_id"] = report.claim_id;
  j["n_probes"] = report.n_probes;
  j["tolerance"] = report.tolerance;
  j["max_abs_violation"] = report.max_abs_violation;
  j["passed"] = report.passed;
  auto detail = [](const ProbeDetail& d) {
    return nlohmann::json{{"probe", d.probe},
                          {"lhs", d.lhs},
                          {"rhs", d.rhs},
                          {"violation", d.violation},
                          {"note", d.note}};
  };
  j["worst"] = detail(report.worst);
  auto& arr = j["violations"] = nlohmann::json::array();
  for (const auto& d : report.violations) arr.push_back(detail(d));
  return j.dump(2);
}

std::string to_json(const std::vector<VerificationReport>& reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) j.push_back(nlohmann::json::parse(to_json(r)));
  return j.dump(2);
}

Scenario SymmetricFamily::scenario(const ValueFunction& value) const {
  Scenario s;
  s.risky = tech;
  s.safe = Arm(LikelihoodPair(1.0, 1.0), safe_success_prob);
  s.signal = neutral_signal();
  s.vis_risky = VisibilityKernel::constant(sigma_bar, sigma_bar);
  s.vis_safe = VisibilityKernel::constant(sigma_bar, sigma_bar);
  s.value = value;
  s.validate();
  return s;
}

Scenario ReformFamily::scenario(const ValueFunction& value) const {
  Scenario s;
  s.risky = tech;
  s.safe = Arm(LikelihoodPair(1.0, 1.0), safe_success_prob);
  s.signal = neutral_signal();
  s.vis_risky = VisibilityKernel::constant(sigma_success, sigma_failure);
  s.vis_safe = VisibilityKernel::constant(sigma_bar_safe, sigma_bar_safe);
  s.value = value;
  s.validate();
  return s;
}

VerificationReport verify_prop1(const SymmetricFamily& family,
                                const std::vector<double>& grid,
                                const NumericSettings& ns) {
  if (!family.tech.informative())
    throw std::invalid_argument("prop1 family needs an informative risky arm");
  VerificationReport rep;
  rep.claim_id = "prop1";
  rep.tolerance = ns.identity_tol;

  const Scenario linear = family.scenario(ValueFunction::linear(1.0, 0.0));
  for (double pi : grid) {
    const double d = delta(pi, linear);
    const double dp = delta_prime_exact(pi, linear, ns);
    rep.record({pi, d, 0.0, std::abs(d), "delta under linear value"});
    rep.record({pi, dp, 0.0, std::abs(dp), "delta' under linear value"});
  }

  // Quadratic value: Delta = (sigma/2) V'' Var exactly, so the slope must
  // match (sigma/2) V'' dVar/dpi and the level carries the sign of V''.
  for (double curv : {1.0, -1.0}) {
    const Scenario quad = family.scenario(ValueFunction::quadratic(0.0, 1.0, curv / 2.0));
    const double h = ns.fd_step;
    for (double pi : grid) {
      const double dp = delta_prime_exact(pi, quad, ns);
      const double var_slope = (posterior_variance(pi + h, family.tech, ns) -
                                posterior_variance(pi - h, family.tech, ns)) /
                               (2.0 * h);
      const double law = 0.5 * family.sigma_bar * curv * var_slope;
      const double mismatch = std::abs(dp - law);
      rep.record({pi, dp, law,
                  mismatch <= 1e-8 ? 0.0 : mismatch,
                  "delta' vs curvature law, V''=" + format_double(curv)});
      const double d = delta(pi, quad);
      const bool sign_ok = (curv > 0.0) ? d > 0.0 : d < 0.0;
      rep.record({pi, d, curv, sign_ok ? 0.0 : std::abs(d) + 1e-9,
                  "sign(delta) vs sign(V'')"});
    }
  }
  rep.finalize();
  return rep;
}

VerificationReport verify_unity_identity(std::size_t draws, std::uint64_t seed,
                                         const NumericSettings& ns) {
  VerificationReport rep;
  rep.claim_id = "unity";
  rep.tolerance = ns.identity_tol;
  CounterRng rng = CounterRng::keyed(seed, {rng_site::kNoise, 1});
  for (std::size_t i = 0; i < draws; ++i) {
    const TechDraw d = draw_tech(rng);
    const LikelihoodPair lr = d.tech.ratios();
    const PosteriorDerivatives pd = posterior_derivatives(d.pi, lr);
    const double p = d.tech.mixture(d.pi);
    const double lhs = d.tech.mixture_slope() * posterior_gap(d.pi, lr) +
                       p * pd.dpi_plus + (1.0 - p) * pd.dpi_minus;
    rep.record({d.pi, lhs, 1.0, std::abs(lhs - 1.0),
                "p_high=" + format_double(d.tech.p_high) +
                    " p_low=" + format_double(d.tech.p_low)});
  }
  rep.finalize();
  return rep;
}

VerificationReport verify_variance_forms(std::size_t draws, std::uint64_t seed,
                                         const NumericSettings& ns) {
  VerificationReport rep;
  rep.claim_id = "variance";
  rep.tolerance = ns.identity_tol;
  CounterRng rng = CounterRng::keyed(seed, {rng_site::kNoise, 1});
  for (std::size_t i = 0; i < draws; ++i) {
    const TechDraw d = draw_tech(rng);
    const LikelihoodPair lr = d.tech.ratios();
    // posterior_variance itself throws if the three closed forms disagree;
    // surviving the call is the triple-identity check.
    double var = 0.0;
    try {
      var = posterior_variance(d.pi, d.tech, ns);
    } catch (const std::logic_error&) {
      rep.record({d.pi, 0.0, 0.0, 1.0, "variance forms disagree"});
      continue;
    }
    const PosteriorSplit s = split(d.pi, d.tech, ns);
    const double gap_direct = s.pi_plus - s.pi_minus;
    const double gap_closed = posterior_gap(d.pi, lr);
    rep.record({d.pi, gap_direct, gap_closed, std::abs(gap_direct - gap_closed),
                "posterior gap closed form"});
    const double var_closed = (lr.lambda - 1.0) * (1.0 - lr.phi) *
                              d.pi * d.pi * (1.0 - d.pi) * (1.0 - d.pi) /
                              (lr.denom_success(d.pi) * lr.denom_failure(d.pi));
    rep.record({d.pi, var, var_closed, std::abs(var - var_closed),
                "variance closed form"});
  }
  rep.finalize();
  return rep;
}

VerificationReport verify_reform_band(const ReformFamily& family,
                                      const std::vector<double>& grid,
                                      const NumericSettings& ns) {
  if (!family.tech.informative())
    throw std::invalid_argument("reform-band family needs an informative risky arm");
  VerificationReport rep;
  rep.claim_id = "band";
  rep.tolerance = 0.0;  // violations are measured against per-check tolerances

  const ValueFunction linear = ValueFunction::linear(1.0, 0.0);
  const double lo_band = 1.0 - family.tech.p_high;
  const double hi_band = 1.0 - family.tech.p_low;
  for (double pi : grid) {
    const double fd = fd_reform_effect(family, linear, pi, true, ns);
    double outside = 0.0;
    if (fd < lo_band - 1e-6) outside = (lo_band - 1e-6) - fd;
    if (fd > hi_band + 1e-6) outside = fd - (hi_band + 1e-6);
    rep.record({pi, fd, lo_band, outside, "band membership of d(delta')/d sigma0"});
  }

  struct LimitCheck {
    double probe;
    bool failure_side;
    double quoted;
    const char* note;
  };
  const double eps = ns.boundary_probe;
  const LimitCheck checks[] = {
      {eps, true, 1.0 - family.tech.p_low, "failure-side limit near pi=0"},
      {1.0 - eps, true, 1.0 - family.tech.p_high, "failure-side limit near pi=1"},
      {eps, false, family.tech.p_low, "success-side limit near pi=0"},
      {1.0 - eps, false, family.tech.p_high, "success-side limit near pi=1"},
  };
  for (const LimitCheck& c : checks) {
    const double fd = fd_reform_effect(family, linear, c.probe, c.failure_side, ns);
    const double scale = std::max({1.0, std::abs(fd), std::abs(c.quoted)});
    const double excess = std::abs(fd - c.quoted) - ns.boundary_tol * scale;
    rep.record({c.probe, fd, c.quoted, std::max(0.0, excess), c.note});
  }
  rep.finalize();
  return rep;
}

VerificationReport verify_boundaries(const OutcomeTech& tech, const NumericSettings& ns) {
  VerificationReport rep;
  rep.claim_id = "boundaries";
  rep.tolerance = 0.0;
  const LikelihoodPair lr = tech.ratios();
  const BoundaryLimits lim = boundary_limits(lr);
  const double eps = ns.boundary_probe;

  auto check = [&](double pi, double got, double want, const char* note) {
    const double scale = std::max({1.0, std::abs(got), std::abs(want)});
    const double excess = std::abs(got - want) - ns.boundary_tol * scale;
    rep.record({pi, got, want, std::max(0.0, excess), note});
  };
  const PosteriorDerivatives at0 = posterior_derivatives(eps, lr);
  const PosteriorDerivatives at1 = posterior_derivatives(1.0 - eps, lr);
  check(eps, at0.dpi_plus, lim.dpi_plus_at0, "dpi+/dpi -> lambda near 0");
  check(eps, at0.dpi_minus, lim.dpi_minus_at0, "dpi-/dpi -> phi near 0");
  check(1.0 - eps, at1.dpi_plus, lim.dpi_plus_at1, "dpi+/dpi -> 1/lambda near 1");
  check(1.0 - eps, at1.dpi_minus, lim.dpi_minus_at1, "dpi-/dpi -> 1/phi near 1");

  // Jumps vanish at both boundaries.
  for (double pi : {eps, 1.0 - eps}) {
    const PosteriorSplit s = split(pi, tech, ns);
    check(pi, s.jump_up(), 0.0, "success jump vanishes at the boundary");
    check(pi, s.jump_down(), 0.0, "failure jump vanishes at the boundary");
  }
  rep.finalize();
  return rep;
}

VerificationReport verify_curvature(const ReformFamily& family,
                                    const std::vector<double>& v_curv_values,
                                    const std::vector<double>& grid,
                                    const NumericSettings& ns) {
  VerificationReport rep;
  rep.claim_id = "curvature";
  rep.tolerance = 0.0;

  for (double v : v_curv_values) {
    if (v < 0.0) throw std::invalid_argument("curvature magnitudes must be >= 0");
    for (double signum : {+1.0, -1.0}) {
      if (v == 0.0 && signum < 0.0) continue;
      const ValueFunction value =
          v == 0.0 ? ValueFunction::linear(1.0, 0.0)
                   : ValueFunction::quadratic(0.0, 1.0, signum * v / 2.0);
      const Scenario probe_scenario = family.scenario(value);
      const CurvatureBound global =
          curvature_bound(0.5, probe_scenario, v, grid);
      for (double pi : grid) {
        const CurvatureBound cb = curvature_bound(pi, probe_scenario, v, grid);
        const bool local_ok = cb.k_val > 0.0 && v < cb.threshold;
        const bool global_ok = global.global_verdict;
        if (!local_ok && !global_ok) continue;
        const double fd = fd_reform_effect(family, value, pi, true, ns);
        rep.record({pi, fd, 0.0, fd > 0.0 ? 0.0 : std::abs(fd) + 1e-9,
                    std::string(local_ok ? "local" : "global") +
                        " curvature bound, |V''|=" + format_double(v) +
                        (signum > 0 ? " convex" : " concave")});
      }
    }
  }
  rep.finalize();
  return rep;
}

VerificationReport verify_dominance(const Scenario& scenario,
                                    const std::vector<double>& grid,
                                    const std::string& claim_id,
                                    const NumericSettings& ns) {
  if (scenario.value.kind() != ValueFunction::Kind::Linear)
    throw std::invalid_argument("dominance biconditional is exact under a linear value only");
  VerificationReport rep;
  rep.claim_id = claim_id;
  rep.tolerance = ns.identity_tol;

  const double slope = scenario.value.slope(0.5);
  const double s1 = scenario.vis_risky.level_success();
  const double s0 = scenario.vis_risky.level_failure();
  const double ss1 = scenario.vis_safe.level_success();
  const double ss0 = scenario.vis_safe.level_failure();
  for (double pi : grid) {
    const DominanceReport d = dominance_map(pi, scenario);
    const double cond_diff = (ss1 * d.weights.a_s - ss0 * d.weights.b_s) -
                             (s1 * d.weights.a - s0 * d.weights.b);
    const double gap = phi_safe(pi, scenario) - psi(pi, scenario);
    // Exact identity Phi - Psi = V' * pi(1-pi) * cond_diff pins the
    // biconditional with no sign ambiguity near ties.
    const double expect = slope * pi * (1.0 - pi) * cond_diff;
    rep.record({pi, gap, expect, std::abs(gap - expect),
                "Phi - Psi vs weight-condition identity"});
    const bool agree = d.linear_condition_holds == (gap >= -ns.identity_tol);
    rep.record({pi, d.linear_condition_holds ? 1.0 : 0.0, gap,
                agree ? 0.0 : 1.0, "condition <=> Phi >= Psi"});
  }
  rep.finalize();
  return rep;
}

Scenario dominance_c1_scenario() {
  Scenario s;
  s.risky = OutcomeTech(0.8, 0.4);
  // Safe experiment informative on failures only; no outcome tech generates
  // it, so it enters as a raw likelihood pair with a flat mixture.
  s.safe = Arm(LikelihoodPair(1.0, 0.5), 0.5);
  s.signal = neutral_signal();
  s.vis_risky = VisibilityKernel::constant(1.0, 1.0);
  s.vis_safe = VisibilityKernel::constant(1.0, 1.0);
  s.value = ValueFunction::linear(1.0, 0.0);
  s.validate();
  return s;
}

Scenario dominance_c2_scenario() {
  Scenario s;
  s.risky = OutcomeTech(0.8, 0.4);  // lambda 2, phi 1/3
  // Strictly higher success informativeness at equal failure informativeness
  // (lambda_S 3 > 2, phi_S = 1/3), so the safe arm dominates pointwise.
  s.safe = Arm(OutcomeTech(0.75, 0.25));
  s.signal = neutral_signal();
  s.vis_risky = VisibilityKernel::constant(1.0, 1.0);
  s.vis_safe = VisibilityKernel::constant(1.0, 1.0);
  s.value = ValueFunction::linear(1.0, 0.0);
  s.validate();
  return s;
}

std::vector<std::string> registered_claims() {
  return {"prop1", "unity", "variance", "band",
          "boundaries", "curvature", "dominance-C1", "dominance-C2"};
}

std::vector<VerificationReport> run_claims(const std::string& selector,
                                           std::uint64_t seed,
                                           const NumericSettings& ns) {
  const std::vector<double> grid = default_grid();
  std::vector<VerificationReport> out;
  auto want = [&](const std::string& id) { return selector == "all" || selector == id; };

  if (want("prop1")) out.push_back(verify_prop1(SymmetricFamily{}, grid, ns));
  if (want("unity")) out.push_back(verify_unity_identity(10000, seed, ns));
  if (want("variance")) out.push_back(verify_variance_forms(10000, seed, ns));
  if (want("band")) out.push_back(verify_reform_band(ReformFamily{}, grid, ns));
  if (want("boundaries")) out.push_back(verify_boundaries(OutcomeTech(0.8, 0.4), ns));
  if (want("curvature"))
    out.push_back(verify_curvature(ReformFamily{}, {0.0, 1.0}, grid, ns));
  if (want("dominance-C1"))
    out.push_back(verify_dominance(dominance_c1_scenario(), grid, "dominance-C1", ns));
  if (want("dominance-C2"))
    out.push_back(verify_dominance(dominance_c2_scenario(), grid, "dominance-C2", ns));

  if (out.empty())
    throw std::invalid_argument("unknown claim selector: " + selector);
  std::sort(out.begin(), out.end(),
            [](const VerificationReport& a, const VerificationReport& b) {
              return a.claim_id < b.claim_id;
            });
  return out;
}

}  // namespace repvis
