#include "repvis/sign_test.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "repvis/util.hpp"

namespace repvis {

namespace {

/// sigma1 [V' D+ + V''/2 D+^2] - sigma0 [V' D- + V''/2 D-^2] at fixed levels.
double weighted_jump_value(double pi, const LikelihoodPair& lr, const KernelPoint& k,
                           const ValueFunction& v) {
  const double up = update_success(pi, lr) - pi;
  const double down = pi - update_failure(pi, lr);
  const double vp = v.slope(pi);
  const double vpp = v.curvature(pi);
  return k.sigma_success * (vp * up + 0.5 * vpp * up * up) -
         k.sigma_failure * (vp * down + 0.5 * vpp * down * down);
}

double b_of(double pi, const OutcomeTech& tech) {
  const LikelihoodPair lr = tech.ratios();
  const double down = pi - update_failure(pi, lr);
  const double slope = tech.mixture_slope();
  const double dminus = posterior_derivatives(pi, lr).dpi_minus;
  return -slope * pi + slope * down + (1.0 - tech.mixture(pi)) * dminus;
}

double k_of(double pi, const OutcomeTech& tech) {
  const LikelihoodPair lr = tech.ratios();
  const double down = pi - update_failure(pi, lr);
  const double slope = tech.mixture_slope();
  const double dminus = posterior_derivatives(pi, lr).dpi_minus;
  return 0.5 * slope * down * down + (1.0 - tech.mixture(pi)) * down * dminus;
}

double d_dsigma0_of(double pi, const OutcomeTech& tech, const ValueFunction& v) {
  const LikelihoodPair lr = tech.ratios();
  const double pm = update_failure(pi, lr);
  const double dminus = posterior_derivatives(pi, lr).dpi_minus;
  return -tech.mixture_slope() * v.value(pm) +
         (1.0 - tech.mixture(pi)) * v.slope(pm) * dminus;
}

double d_dsigma1_of(double pi, const OutcomeTech& tech, const ValueFunction& v) {
  const LikelihoodPair lr = tech.ratios();
  const double pp = update_success(pi, lr);
  const double dplus = posterior_derivatives(pi, lr).dpi_plus;
  return tech.mixture_slope() * v.value(pp) + tech.mixture(pi) * v.slope(pp) * dplus;
}

}  // namespace

double psi(double pi, const Scenario& scenario) {
  require_interior(pi);
  return weighted_jump_value(pi, scenario.risky.ratios(), scenario.vis_risky.at(pi),
                             scenario.value);
}

double phi_safe(double pi, const Scenario& scenario) {
  require_interior(pi);
  return weighted_jump_value(pi, scenario.safe.ratios(), scenario.vis_safe.at(pi),
                             scenario.value);
}

double gamma_direct(double pi, const Scenario& scenario) {
  require_interior(pi);
  const KernelPoint kr = scenario.vis_risky.at(pi);
  const KernelPoint ks = scenario.vis_safe.at(pi);
  const LikelihoodPair lr = scenario.risky.ratios();
  const LikelihoodPair ls = scenario.safe.ratios();
  const double p = scenario.risky.mixture(pi);
  const double r = scenario.safe.mixture(pi);
  const ValueFunction& v = scenario.value;
  return kr.dsigma_success_dpi * p * v.value(update_success(pi, lr)) +
         kr.dsigma_failure_dpi * (1.0 - p) * v.value(update_failure(pi, lr)) -
         ks.dsigma_success_dpi * r * v.value(update_success(pi, ls)) -
         ks.dsigma_failure_dpi * (1.0 - r) * v.value(update_failure(pi, ls));
}

double delta_prime_core(double pi, const Scenario& scenario) {
  return scenario.risky.mixture_slope() * psi(pi, scenario) -
         scenario.safe.mixture_slope() * phi_safe(pi, scenario) +
         gamma_direct(pi, scenario);
}

VisibilityPartials visibility_partials(double pi, const Scenario& scenario,
                                       const NumericSettings& ns) {
  require_interior(pi);
  const OutcomeTech& tech = scenario.risky;
  const ValueFunction& v = scenario.value;
  VisibilityPartials out;
  out.d_dsigma0 = d_dsigma0_of(pi, tech, v);
  out.d_dsigma1 = d_dsigma1_of(pi, tech, v);
  out.linear_benchmark_dsigma0 = b_of(pi, tech);
  out.curvature_correction_dsigma0 = out.d_dsigma0 - out.linear_benchmark_dsigma0;
  const double lo = ns.boundary_probe;
  const double hi = 1.0 - ns.boundary_probe;
  out.limit_pi0_sigma0 = d_dsigma0_of(lo, tech, v);
  out.limit_pi1_sigma0 = d_dsigma0_of(hi, tech, v);
  out.limit_pi0_sigma1 = d_dsigma1_of(lo, tech, v);
  out.limit_pi1_sigma1 = d_dsigma1_of(hi, tech, v);
  return out;
}

CurvatureBound curvature_bound(double pi, const Scenario& scenario, double v_curv_sup,
                               const std::vector<double>& grid) {
  require_interior(pi);
  if (v_curv_sup < 0.0) throw std::domain_error("curvature sup must be nonnegative");
  if (scenario.safe.ratios().informative())
    throw std::invalid_argument("curvature bound requires an uninformative safe arm");
  if (!scenario.vis_safe.constant_levels() || !scenario.vis_risky.constant_levels())
    throw std::invalid_argument("curvature bound requires constant visibility kernels");

  CurvatureBound cb;
  cb.b_val = b_of(pi, scenario.risky);
  cb.k_val = k_of(pi, scenario.risky);
  cb.vacuous = cb.b_val <= 0.0;
  if (cb.k_val > 0.0) {
    cb.threshold = cb.b_val / cb.k_val;
    cb.verdict = !cb.vacuous && v_curv_sup < cb.threshold;
  }

  const std::vector<double> g = grid.empty() ? default_grid() : grid;
  double inf_b = std::numeric_limits<double>::infinity();
  double sup_k = 0.0;
  for (double x : g) {
    inf_b = std::min(inf_b, b_of(x, scenario.risky));
    sup_k = std::max(sup_k, k_of(x, scenario.risky));
  }
  if (sup_k > 0.0) {
    cb.global_threshold = inf_b / sup_k;
    cb.global_verdict = inf_b > 0.0 && v_curv_sup < cb.global_threshold;
  }
  return cb;
}

DominanceReport dominance_map(double pi, const Scenario& scenario) {
  require_interior(pi);
  if (!scenario.vis_risky.constant_levels() || !scenario.vis_safe.constant_levels())
    throw std::invalid_argument("dominance map requires constant visibility kernels");

  const LikelihoodPair lr = scenario.risky.ratios();
  const LikelihoodPair ls = scenario.safe.ratios();
  DominanceReport rep;
  rep.weights.a = (lr.lambda - 1.0) / lr.denom_success(pi);
  rep.weights.b = (1.0 - lr.phi) / lr.denom_failure(pi);
  rep.weights.a_s = (ls.lambda - 1.0) / ls.denom_success(pi);
  rep.weights.b_s = (1.0 - ls.phi) / ls.denom_failure(pi);

  const double s1 = scenario.vis_risky.level_success();
  const double s0 = scenario.vis_risky.level_failure();
  const double ss1 = scenario.vis_safe.level_success();
  const double ss0 = scenario.vis_safe.level_failure();
  rep.linear_condition_holds =
      ss1 * rep.weights.a_s - ss0 * rep.weights.b_s >=
      s1 * rep.weights.a - s0 * rep.weights.b;

  // pi -> 1 limits: a -> (lambda-1)/lambda, b -> (1-phi)/phi.
  const double a1 = (lr.lambda - 1.0) / lr.lambda;
  const double b1 = (1.0 - lr.phi) / lr.phi;
  const double as1 = (ls.lambda - 1.0) / ls.lambda;
  const double bs1 = (1.0 - ls.phi) / ls.phi;
  rep.boundary_sufficient_holds = ss1 * as1 - ss0 * bs1 >= s1 * a1 - s0 * b1;
  return rep;
}

SignTestReport cutoff_slope_sign(double pi, const Scenario& scenario,
                                 const NumericSettings& ns) {
  SignTestReport r;
  r.pi = pi;
  r.psi = psi(pi, scenario);
  r.phi = phi_safe(pi, scenario);
  r.gamma = gamma_direct(pi, scenario);
  r.delta_prime_exact = delta_prime_exact(pi, scenario, ns);
  r.delta_prime_core = scenario.risky.mixture_slope() * r.psi -
                       scenario.safe.mixture_slope() * r.phi + r.gamma;
  r.residual = r.delta_prime_exact - r.delta_prime_core;
  r.sign_exact = classify_sign(r.delta_prime_exact, ns.sign_zero_band);
  r.sign_core = classify_sign(r.delta_prime_core, ns.sign_zero_band);
  r.cutoff_slope_sign = -r.sign_exact;
  r.signs_disagree = r.sign_exact != r.sign_core;
  r.conservatism_holds = r.phi >= r.psi;
  return r;
}

std::vector<double> default_grid() {
  std::vector<double> g;
  g.reserve(99);
  for (int i = 1; i <= 99; ++i) g.push_back(static_cast<double>(i) / 100.0);
  return g;
}

std::vector<SweepRow> sweep(const Scenario& scenario, const std::vector<double>& grid,
                            const NumericSettings& ns, unsigned threads) {
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    const double pi = grid[i];
    SweepRow& row = rows[i];
    row.report = cutoff_slope_sign(pi, scenario, ns);
    row.b_val = b_of(pi, scenario.risky);
    row.k_val = k_of(pi, scenario.risky);
    row.d_dsigma0 = d_dsigma0_of(pi, scenario.risky, scenario.value);
    row.d_dsigma1 = d_dsigma1_of(pi, scenario.risky, scenario.value);
  });
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "pi,psi,phi,gamma,delta_prime_exact,delta_prime_core,residual,"
        "sign_exact,sign_core,conservatism,B,K,d_dsigma0,d_dsigma1\n";
  for (const SweepRow& w : rows) {
    const SignTestReport& r = w.report;
    os << format_double(r.pi) << ',' << format_double(r.psi) << ','
       << format_double(r.phi) << ',' << format_double(r.gamma) << ','
       << format_double(r.delta_prime_exact) << ','
       << format_double(r.delta_prime_core) << ',' << format_double(r.residual)
       << ',' << r.sign_exact << ',' << r.sign_core << ','
       << (r.conservatism_holds ? 1 : 0) << ',' << format_double(w.b_val) << ','
       << format_double(w.k_val) << ',' << format_double(w.d_dsigma0) << ','
       << format_double(w.d_dsigma1) << '\n';
  }
}

}  // namespace repvis
