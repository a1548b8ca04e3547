#include "repvis/model.hpp"

#include <algorithm>
#include <cmath>

namespace repvis {

namespace {

double odds(double pi) { return pi / (1.0 - pi); }
double from_odds(double o) { return o / (1.0 + o); }

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(what) + " outside [0,1]: " +
                                std::to_string(v));
}

}  // namespace

// ---------------------------------------------------------------------------
// SignalTech

double SignalTech::posterior_good(double pi) const {
  require_interior(pi);
  return from_odds(odds(pi) * (q_high / q_low));
}

double SignalTech::posterior_bad(double pi) const {
  require_interior(pi);
  return from_odds(odds(pi) * ((1.0 - q_high) / (1.0 - q_low)));
}

// ---------------------------------------------------------------------------
// VisibilityKernel

VisibilityKernel VisibilityKernel::constant(double sigma_success, double sigma_failure) {
  check_unit(sigma_success, "sigma_success");
  check_unit(sigma_failure, "sigma_failure");
  VisibilityKernel k(Kind::Constant);
  k.sigma_success_ = sigma_success;
  k.sigma_failure_ = sigma_failure;
  return k;
}

VisibilityKernel VisibilityKernel::security_floor(double kappa, double delta,
                                                  double sigma_success) {
  check_unit(kappa, "kappa");
  check_unit(delta, "delta");
  check_unit(sigma_success, "sigma_success");
  VisibilityKernel k(Kind::SecurityFloor);
  k.kappa_ = kappa;
  k.delta_ = delta;
  k.sigma_success_ = sigma_success;
  k.sigma_failure_ = kappa + (1.0 - kappa) * delta;
  return k;
}

VisibilityKernel VisibilityKernel::tabulated(std::vector<Knot> knots) {
  if (knots.size() < 2)
    throw std::invalid_argument("tabulated kernel needs at least two knots");
  std::sort(knots.begin(), knots.end(),
            [](const Knot& a, const Knot& b) { return a.pi < b.pi; });
  for (std::size_t i = 0; i < knots.size(); ++i) {
    check_unit(knots[i].sigma_success, "sigma_success knot");
    check_unit(knots[i].sigma_failure, "sigma_failure knot");
    if (i > 0 && !(knots[i].pi > knots[i - 1].pi))
      throw std::invalid_argument("tabulated kernel knots must be strictly increasing");
  }

  VisibilityKernel k(Kind::Tabulated);
  k.knots_ = std::move(knots);
  const std::size_t n = k.knots_.size();
  k.slope_success_.resize(n);
  k.slope_failure_.resize(n);
  auto slope_at = [&](std::size_t i, auto get) {
    // Central difference on the knot spacing; one-sided at the ends.
    const std::size_t lo = (i == 0) ? 0 : i - 1;
    const std::size_t hi = (i + 1 == n) ? i : i + 1;
    return (get(k.knots_[hi]) - get(k.knots_[lo])) / (k.knots_[hi].pi - k.knots_[lo].pi);
  };
  for (std::size_t i = 0; i < n; ++i) {
    k.slope_success_[i] = slope_at(i, [](const Knot& q) { return q.sigma_success; });
    k.slope_failure_[i] = slope_at(i, [](const Knot& q) { return q.sigma_failure; });
  }

  // The Hermite curve through in-range knots can overshoot; reject tables
  // whose interpolant leaves [0,1] rather than clamping.
  const double lo = k.knots_.front().pi, hi = k.knots_.back().pi;
  for (int i = 0; i <= 400; ++i) {
    const double pi = lo + (hi - lo) * (static_cast<double>(i) / 400.0);
    const KernelPoint p = k.at(pi);
    if (!(p.sigma_success >= -1e-12 && p.sigma_success <= 1.0 + 1e-12 &&
          p.sigma_failure >= -1e-12 && p.sigma_failure <= 1.0 + 1e-12))
      throw std::invalid_argument("tabulated kernel interpolant leaves [0,1]");
  }
  return k;
}

KernelPoint VisibilityKernel::at(double pi) const {
  KernelPoint p;
  switch (kind_) {
    case Kind::Constant:
    case Kind::SecurityFloor:
      p.sigma_success = sigma_success_;
      p.sigma_failure = sigma_failure_;
      return p;
    case Kind::Tabulated:
      break;
  }

  const auto& ks = knots_;
  if (pi <= ks.front().pi) {
    p.sigma_success = ks.front().sigma_success;
    p.sigma_failure = ks.front().sigma_failure;
    return p;  // flat outside the table
  }
  if (pi >= ks.back().pi) {
    p.sigma_success = ks.back().sigma_success;
    p.sigma_failure = ks.back().sigma_failure;
    return p;
  }
  std::size_t i = 1;
  while (ks[i].pi < pi) ++i;
  const std::size_t a = i - 1, b = i;
  const double h = ks[b].pi - ks[a].pi;
  const double t = (pi - ks[a].pi) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double g00 = 6 * t2 - 6 * t, g10 = 3 * t2 - 4 * t + 1;
  const double g01 = -6 * t2 + 6 * t, g11 = 3 * t2 - 2 * t;

  auto eval = [&](auto get, const std::vector<double>& m, double* value, double* slope) {
    const double ya = get(ks[a]), yb = get(ks[b]);
    *value = h00 * ya + h10 * h * m[a] + h01 * yb + h11 * h * m[b];
    *slope = (g00 * ya + g10 * h * m[a] + g01 * yb + g11 * h * m[b]) / h;
  };
  eval([](const Knot& q) { return q.sigma_success; }, slope_success_,
       &p.sigma_success, &p.dsigma_success_dpi);
  eval([](const Knot& q) { return q.sigma_failure; }, slope_failure_,
       &p.sigma_failure, &p.dsigma_failure_dpi);
  return p;
}

double VisibilityKernel::kappa() const {
  if (kind_ != Kind::SecurityFloor) throw std::logic_error("kernel has no kappa");
  return kappa_;
}
double VisibilityKernel::delta() const {
  if (kind_ != Kind::SecurityFloor) throw std::logic_error("kernel has no delta");
  return delta_;
}
double VisibilityKernel::level_success() const {
  if (kind_ == Kind::Tabulated) throw std::logic_error("kernel has no constant levels");
  return sigma_success_;
}
double VisibilityKernel::level_failure() const {
  if (kind_ == Kind::Tabulated) throw std::logic_error("kernel has no constant levels");
  return sigma_failure_;
}
const std::vector<VisibilityKernel::Knot>& VisibilityKernel::knots() const {
  if (kind_ != Kind::Tabulated) throw std::logic_error("kernel has no knots");
  return knots_;
}

// ---------------------------------------------------------------------------
// ReformShift / apply_reform

ReformShift ReformShift::constants(double delta_failure_level, double delta_success_level) {
  ReformShift s;
  s.delta_failure = [delta_failure_level](double) { return delta_failure_level; };
  s.delta_success = [delta_success_level](double) { return delta_success_level; };
  return s;
}

VisibilityKernel apply_reform(const VisibilityKernel& kernel, const ReformShift& shift,
                              const std::vector<double>& grid) {
  if (!shift.delta_failure || !shift.delta_success)
    throw std::invalid_argument("reform shift is missing a component");

  std::vector<double> pis = grid;
  if (pis.empty()) {
    if (kernel.kind() == VisibilityKernel::Kind::Tabulated) {
      for (const auto& k : kernel.knots()) pis.push_back(k.pi);
    } else {
      for (int i = 0; i <= 100; ++i) pis.push_back(static_cast<double>(i) / 100.0);
    }
  }

  bool shift_constant = true;
  const double d0_ref = shift.delta_failure(pis.front());
  const double d1_ref = shift.delta_success(pis.front());
  for (double pi : pis) {
    const double d0 = shift.delta_failure(pi);
    const double d1 = shift.delta_success(pi);
    if (d1 < 0.0 || d0 < d1)
      throw std::invalid_argument(
          "reform shift must satisfy Delta0 >= Delta1 >= 0 on the grid (pi=" +
          std::to_string(pi) + ")");
    const KernelPoint p = kernel.at(pi);
    if (p.sigma_failure + d0 > 1.0 + 1e-12 || p.sigma_success + d1 > 1.0 + 1e-12)
      throw std::invalid_argument(
          "reform pushes a survival probability above 1 at pi=" + std::to_string(pi));
    if (d0 != d0_ref || d1 != d1_ref) shift_constant = false;
  }

  if (shift_constant && kernel.constant_levels()) {
    return VisibilityKernel::constant(
        std::min(1.0, kernel.level_success() + d1_ref),
        std::min(1.0, kernel.level_failure() + d0_ref));
  }

  std::vector<VisibilityKernel::Knot> knots;
  knots.reserve(pis.size());
  for (double pi : pis) {
    const KernelPoint p = kernel.at(pi);
    knots.push_back({pi, std::min(1.0, p.sigma_success + shift.delta_success(pi)),
                     std::min(1.0, p.sigma_failure + shift.delta_failure(pi))});
  }
  return VisibilityKernel::tabulated(std::move(knots));
}

// ---------------------------------------------------------------------------
// ValueFunction

ValueFunction ValueFunction::linear(double slope, double intercept) {
  ValueFunction v(Kind::Linear);
  v.c0_ = intercept;
  v.c1_ = slope;
  v.c2_ = 0.0;
  v.check_increasing();
  return v;
}

ValueFunction ValueFunction::quadratic(double c0, double c1, double c2) {
  ValueFunction v(Kind::Quadratic);
  v.c0_ = c0;
  v.c1_ = c1;
  v.c2_ = c2;
  v.check_increasing();
  return v;
}

ValueFunction ValueFunction::piecewise_linear(std::vector<std::pair<double, double>> knots) {
  if (knots.size() < 2)
    throw std::invalid_argument("piecewise-linear value needs at least two knots");
  std::sort(knots.begin(), knots.end());
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i].first > knots[i - 1].first))
      throw std::invalid_argument("value knots must be strictly increasing in x");
  ValueFunction v(Kind::PiecewiseLinear);
  v.knots_ = std::move(knots);
  v.check_increasing();
  return v;
}

void ValueFunction::check_increasing() const {
  auto probe = [&](double x) {
    if (!(slope(x) > 0.0))
      throw std::invalid_argument("career value must be strictly increasing; V' <= 0 at x=" +
                                  std::to_string(x));
  };
  probe(1e-4);
  probe(1.0 - 1e-4);
  for (int i = 1; i < 200; ++i) probe(static_cast<double>(i) / 200.0);
}

double ValueFunction::value(double x) const {
  if (kind_ != Kind::PiecewiseLinear) return c0_ + c1_ * x + c2_ * x * x;
  // Linear extension beyond the end knots keeps the function increasing.
  std::size_t i = 1;
  while (i + 1 < knots_.size() && knots_[i].first < x) ++i;
  const auto& [xa, ya] = knots_[i - 1];
  const auto& [xb, yb] = knots_[i];
  return ya + (yb - ya) / (xb - xa) * (x - xa);
}

double ValueFunction::slope(double x) const {
  if (kind_ != Kind::PiecewiseLinear) return c1_ + 2.0 * c2_ * x;
  std::size_t i = 1;
  while (i + 1 < knots_.size() && knots_[i].first < x) ++i;
  const auto& [xa, ya] = knots_[i - 1];
  const auto& [xb, yb] = knots_[i];
  return (yb - ya) / (xb - xa);
}

double ValueFunction::curvature(double x) const {
  (void)x;
  return kind_ == Kind::PiecewiseLinear ? 0.0 : 2.0 * c2_;
}

double ValueFunction::curvature_sup() const {
  return kind_ == Kind::Quadratic ? std::abs(2.0 * c2_) : 0.0;
}

// ---------------------------------------------------------------------------
// Arm / Scenario

Arm::Arm(const LikelihoodPair& lr, double mix_success, double mix_slope)
    : has_tech_(false), lr_(lr), mix_(mix_success), mix_slope_(mix_slope) {
  require_probability(mix_success, "mix_success");
  require_probability(mix_success - 0.5 * mix_slope, "mixture at pi=0");
  require_probability(mix_success + 0.5 * mix_slope, "mixture at pi=1");
}

const OutcomeTech& Arm::tech() const {
  if (!has_tech_) throw std::logic_error("arm carries raw likelihood ratios, not a tech");
  return tech_;
}

double Arm::mixture(double pi) const {
  if (has_tech_) return tech_.mixture(pi);
  return mix_ + mix_slope_ * (pi - 0.5);
}

void Scenario::validate() const {
  if (!risky.informative())
    throw std::invalid_argument("risky arm must be strictly informative");
  // Kernels and value functions validate at construction; nothing else to do.
}

const char* to_string(Policy p) {
  switch (p) {
    case Policy::AlwaysRisky: return "always_risky";
    case Policy::RiskyIffGood: return "risky_iff_good";
    case Policy::NeverRisky: return "never_risky";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Continuation values and the value gap

namespace {

struct ArmView {
  LikelihoodPair lr;
  double mixture;
  double mixture_slope;
  const VisibilityKernel* kernel;
};

ArmView view(double pi, ArmChoice arm, const Scenario& sc) {
  if (arm == ArmChoice::Risky)
    return {sc.risky.ratios(), sc.risky.mixture(pi), sc.risky.mixture_slope(),
            &sc.vis_risky};
  return {sc.safe.ratios(), sc.safe.mixture(pi), sc.safe.mixture_slope(), &sc.vis_safe};
}

double arm_value(double pi, const ArmView& a, const ValueFunction& v,
                 std::optional<double> p_override) {
  const double p = p_override.value_or(a.mixture);
  const KernelPoint k = a.kernel->at(pi);
  const double up = update_success(pi, a.lr);
  const double down = update_failure(pi, a.lr);
  return p * k.sigma_success * v.value(up) +
         (1.0 - p) * k.sigma_failure * v.value(down);
}

/// d/dpi of arm_value at the public mixture, with kernel slope terms.
double arm_value_prime(double pi, const ArmView& a, const ValueFunction& v) {
  const KernelPoint k = a.kernel->at(pi);
  const double up = update_success(pi, a.lr);
  const double down = update_failure(pi, a.lr);
  const PosteriorDerivatives d = posterior_derivatives(pi, a.lr);
  const double p = a.mixture;
  return a.mixture_slope * (k.sigma_success * v.value(up) - k.sigma_failure * v.value(down)) +
         p * (k.dsigma_success_dpi * v.value(up) +
              k.sigma_success * v.slope(up) * d.dpi_plus) +
         (1.0 - p) * (k.dsigma_failure_dpi * v.value(down) +
                      k.sigma_failure * v.slope(down) * d.dpi_minus);
}

}  // namespace

double continuation_value(double pi, ArmChoice arm, const Scenario& scenario,
                          std::optional<double> private_success_prob) {
  require_interior(pi);
  if (private_success_prob) require_probability(*private_success_prob, "private_success_prob");
  return arm_value(pi, view(pi, arm, scenario), scenario.value, private_success_prob);
}

double delta(double pi, const Scenario& scenario) {
  return continuation_value(pi, ArmChoice::Risky, scenario) -
         continuation_value(pi, ArmChoice::Safe, scenario);
}

double delta_given_signal(double pi, bool good_signal, const Scenario& scenario) {
  require_interior(pi);
  const double chi = good_signal ? scenario.signal.posterior_good(pi)
                                 : scenario.signal.posterior_bad(pi);
  const double p_risky = scenario.risky.mixture(chi);
  const double p_safe = scenario.safe.mixture(chi);
  return continuation_value(pi, ArmChoice::Risky, scenario, p_risky) -
         continuation_value(pi, ArmChoice::Safe, scenario, p_safe);
}

double delta_prime_exact_unchecked(double pi, const Scenario& scenario) {
  require_interior(pi);
  return arm_value_prime(pi, view(pi, ArmChoice::Risky, scenario), scenario.value) -
         arm_value_prime(pi, view(pi, ArmChoice::Safe, scenario), scenario.value);
}

double delta_prime_exact(double pi, const Scenario& scenario, const NumericSettings& ns) {
  const double analytic = delta_prime_exact_unchecked(pi, scenario);
  const double h = ns.fd_step;
  if (pi - h <= 0.0 || pi + h >= 1.0)
    throw std::domain_error("belief too close to the boundary for the FD cross-check");
  const double fd = (delta(pi + h, scenario) - delta(pi - h, scenario)) / (2.0 * h);
  // Absolute floor covers the FD rounding noise near exact zeros.
  if (!close_rel(analytic, fd, ns.fd_rel_tol) && std::abs(analytic - fd) > 1e-7)
    throw std::logic_error("analytic delta' disagrees with finite difference: " +
                           std::to_string(analytic) + " vs " + std::to_string(fd));
  return analytic;
}

Policy cutoff_policy(double pi, const Scenario& scenario) {
  require_interior(pi);
  // Rounding noise around an exact indifference must land on the risky side
  // of the tie rule, hence the band.
  constexpr double kTieBand = 1e-12;
  const double d_good = delta_given_signal(pi, true, scenario);
  if (d_good < -kTieBand) return Policy::NeverRisky;
  const double d_bad = delta_given_signal(pi, false, scenario);
  if (d_bad >= -kTieBand) return Policy::AlwaysRisky;
  return Policy::RiskyIffGood;
}

}  // namespace repvis
