#include "repvis/posterior.hpp"

#include <cmath>

namespace repvis {

namespace {

void check_interior(double pi) { require_interior(pi); }

double variance_three_forms(double pi, const LikelihoodPair& lr, double p,
                            const NumericSettings& ns) {
  const double up = update_success(pi, lr) - pi;
  const double down = pi - update_failure(pi, lr);
  const double gap = posterior_gap(pi, lr);

  const double v_gap = p * (1.0 - p) * gap * gap;
  const double v_moment = p * up * up + (1.0 - p) * down * down;
  const double v_product = up * down;

  if (std::abs(v_gap - v_moment) > ns.identity_tol ||
      std::abs(v_gap - v_product) > ns.identity_tol ||
      std::abs(v_moment - v_product) > ns.identity_tol)
    throw std::logic_error("posterior variance forms disagree beyond tolerance");
  return v_product;
}

}  // namespace

double update_success(double pi, const LikelihoodPair& lr) {
  if (pi == 0.0 || pi == 1.0) return pi;  // fixed points
  check_interior(pi);
  return lr.lambda * pi / lr.denom_success(pi);
}

double update_failure(double pi, const LikelihoodPair& lr) {
  if (pi == 0.0 || pi == 1.0) return pi;
  check_interior(pi);
  return lr.phi * pi / lr.denom_failure(pi);
}

PosteriorSplit split(double pi, const OutcomeTech& tech, const NumericSettings& ns) {
  check_interior(pi);
  const LikelihoodPair lr = tech.ratios();
  PosteriorSplit s;
  s.prior = pi;
  s.pi_plus = update_success(pi, lr);
  s.pi_minus = update_failure(pi, lr);
  s.p_success = tech.mixture(pi);
  const double balance =
      s.p_success * s.jump_up() - (1.0 - s.p_success) * s.jump_down();
  if (std::abs(balance) > ns.identity_tol)
    throw std::logic_error("martingale balance violated in posterior split");
  return s;
}

PosteriorSplit split_raw(double pi, const LikelihoodPair& lr, double p_success) {
  check_interior(pi);
  require_probability(p_success, "p_success");
  PosteriorSplit s;
  s.prior = pi;
  s.pi_plus = update_success(pi, lr);
  s.pi_minus = update_failure(pi, lr);
  s.p_success = p_success;
  return s;
}

PosteriorDerivatives posterior_derivatives(double pi, const LikelihoodPair& lr) {
  check_interior(pi);
  const double dl = lr.denom_success(pi);
  const double df = lr.denom_failure(pi);
  PosteriorDerivatives d;
  d.dpi_plus = lr.lambda / (dl * dl);
  d.dpi_minus = lr.phi / (df * df);
  d.d2pi_plus = -2.0 * lr.lambda * (lr.lambda - 1.0) / (dl * dl * dl);
  d.d2pi_minus = -2.0 * lr.phi * (lr.phi - 1.0) / (df * df * df);
  return d;
}

double posterior_variance(double pi, const OutcomeTech& tech, const NumericSettings& ns) {
  check_interior(pi);
  return variance_three_forms(pi, tech.ratios(), tech.mixture(pi), ns);
}

double posterior_variance_raw(double pi, const LikelihoodPair& lr,
                              const NumericSettings& ns) {
  check_interior(pi);
  const double up = update_success(pi, lr) - pi;
  const double down = pi - update_failure(pi, lr);
  if (up + down == 0.0) return 0.0;  // uninformative pair
  return variance_three_forms(pi, lr, down / (up + down), ns);
}

double posterior_gap(double pi, const LikelihoodPair& lr) {
  check_interior(pi);
  return (lr.lambda - lr.phi) * pi * (1.0 - pi) /
         (lr.denom_success(pi) * lr.denom_failure(pi));
}

InformativenessPartials informativeness_partials(double pi, const LikelihoodPair& lr) {
  if (pi == 0.0 || pi == 1.0) return {};  // boundary fixed points: all zero
  check_interior(pi);
  const double dl = lr.denom_success(pi);
  const double df = lr.denom_failure(pi);
  const double x = pi * (1.0 - pi);
  InformativenessPartials p;
  p.dpiplus_dlambda = x / (dl * dl);
  p.djumpplus_dlambda = x / (dl * dl);
  p.dpiminus_dphi = x / (df * df);
  p.djumpminus_dphi = x / (df * df);
  return p;
}

BoundaryLimits boundary_limits(const LikelihoodPair& lr) {
  return {lr.lambda, lr.phi, 1.0 / lr.lambda, 1.0 / lr.phi};
}

LikelihoodPair dilate(const LikelihoodPair& lr, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw std::domain_error("dilation parameter must lie in [0,1]");
  if (tau == 0.0) return {1.0, 1.0};
  return {1.0 + tau * (lr.lambda - 1.0), 1.0 - tau * (1.0 - lr.phi)};
}

OutcomeTech dilate(const OutcomeTech& tech, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw std::domain_error("dilation parameter must lie in [0,1]");
  return {tech.p_low + tau * (tech.p_high - tech.p_low), tech.p_low};
}

}  // namespace repvis
