#pragma once

#include "repvis/numeric.hpp"

namespace repvis {

/// Fixed likelihood-ratio pair of a binary experiment.  `lambda` multiplies
/// the odds after a success, `phi` after a failure.  lambda = phi = 1 is the
/// uninformative experiment.  Pairs with exactly one informative side (e.g.
/// lambda = 1, phi < 1: informative on failures only) are admitted as raw
/// experiments; no two-point outcome technology generates them, which is why
/// arms can carry raw pairs with a separately supplied mixture.
struct LikelihoodPair {
  double lambda = 1.0;
  double phi = 1.0;

  LikelihoodPair() = default;
  LikelihoodPair(double lambda_, double phi_) : lambda(lambda_), phi(phi_) {
    if (!(lambda > 0.0) || !(phi > 0.0))
      throw std::domain_error("likelihood ratios must be positive");
    if (lambda < 1.0 || phi > 1.0)
      throw std::domain_error(
          "success ratio must be >= 1 and failure ratio <= 1");
  }

  bool informative() const { return lambda > 1.0 || phi < 1.0; }

  /// Odds-map denominators D_lambda = 1 - pi + lambda*pi (and phi analog).
  double denom_success(double pi) const { return 1.0 - pi + lambda * pi; }
  double denom_failure(double pi) const { return 1.0 - pi + phi * pi; }
};

/// Success probabilities of an arm conditional on the two competence types.
/// Likelihood ratios and the mixture success probability derive from it.
struct OutcomeTech {
  double p_high = 0.5;
  double p_low = 0.5;

  OutcomeTech() = default;
  OutcomeTech(double p_high_, double p_low_) : p_high(p_high_), p_low(p_low_) {
    if (!(p_low > 0.0 && p_high < 1.0 && p_low <= p_high))
      throw std::domain_error("need 0 < p_low <= p_high < 1");
  }

  bool informative() const { return p_high > p_low; }
  double mixture(double pi) const { return p_low + (p_high - p_low) * pi; }
  double mixture_slope() const { return p_high - p_low; }
  LikelihoodPair ratios() const {
    return {p_high / p_low, (1.0 - p_high) / (1.0 - p_low)};
  }
};

/// Two-point posterior of one Bayesian step: the updated beliefs after an
/// observed success / failure and the mixture success probability at the
/// prior.  `pi_minus <= prior <= pi_plus` and the martingale identity
/// p*(pi_plus - prior) = (1-p)*(prior - pi_minus) hold by construction.
struct PosteriorSplit {
  double prior = 0.0;
  double pi_plus = 0.0;
  double pi_minus = 0.0;
  double p_success = 0.0;

  double jump_up() const { return pi_plus - prior; }     // Delta^+
  double jump_down() const { return prior - pi_minus; }  // Delta^-
};

/// First and second derivatives of the posterior maps in the prior.
struct PosteriorDerivatives {
  double dpi_plus = 1.0;
  double dpi_minus = 1.0;
  double d2pi_plus = 0.0;
  double d2pi_minus = 0.0;
};

/// Sensitivities with respect to experiment informativeness at a fixed prior.
/// All four equal pi(1-pi)/D^2 with the matching denominator; the failure-side
/// entries are stated per unit of failure informativeness (1 - phi), so all
/// values are positive on the open interval.
struct InformativenessPartials {
  double dpiplus_dlambda = 0.0;
  double dpiminus_dphi = 0.0;
  double djumpplus_dlambda = 0.0;
  double djumpminus_dphi = 0.0;
};

/// Division-free boundary limits of the posterior-map derivatives.
struct BoundaryLimits {
  double dpi_plus_at0;   // lambda
  double dpi_minus_at0;  // phi
  double dpi_plus_at1;   // 1/lambda
  double dpi_minus_at1;  // 1/phi
};

/// Posterior after an observed success: lambda*pi / (1 - pi + lambda*pi).
/// pi in {0,1} is returned unchanged (fixed points of the odds map).
double update_success(double pi, const LikelihoodPair& lr);

/// Posterior after an observed failure: phi*pi / (1 - pi + phi*pi).
double update_failure(double pi, const LikelihoodPair& lr);

/// Both updates plus the mixture probability, with the martingale identity
/// asserted to NumericSettings::identity_tol.
PosteriorSplit split(double pi, const OutcomeTech& tech,
                     const NumericSettings& ns = NumericSettings::defaults());

/// As above for a raw likelihood pair with an explicitly supplied mixture
/// success probability (raw pairs carry no type-conditional outcome model,
/// so the caller owns p_success; no martingale assertion is possible then).
PosteriorSplit split_raw(double pi, const LikelihoodPair& lr, double p_success);

/// dpi^{+-}/dpi = lr/D^2 and the second derivatives -2 lr (lr - 1)/D^3.
/// Requires interior pi; see boundary_limits for the endpoint values.
PosteriorDerivatives posterior_derivatives(double pi, const LikelihoodPair& lr);

/// Var(pi' | pi) computed in all three closed forms --
/// p(1-p)(pi_plus-pi_minus)^2, p Dup^2 + (1-p) Ddown^2, Dup*Ddown -- with
/// pairwise agreement enforced at identity_tol.  Disagreement means an
/// algebra bug and throws std::logic_error.
double posterior_variance(double pi, const OutcomeTech& tech,
                          const NumericSettings& ns = NumericSettings::defaults());

/// Same three-form variance for a raw pair.  The mixture probability is the
/// martingale-consistent one, p = jump_down / (jump_up + jump_down); any
/// other choice would make the two-point posterior fail E[pi'] = pi and the
/// triple identity with it.
double posterior_variance_raw(double pi, const LikelihoodPair& lr,
                              const NumericSettings& ns = NumericSettings::defaults());

/// Closed form of the posterior gap pi_plus - pi_minus:
/// (lambda - phi) pi (1-pi) / (D_lambda D_phi).
double posterior_gap(double pi, const LikelihoodPair& lr);

InformativenessPartials informativeness_partials(double pi, const LikelihoodPair& lr);

BoundaryLimits boundary_limits(const LikelihoodPair& lr);

/// Linear dilation path between the uninformative experiment (tau = 0) and
/// the given one (tau = 1): lambda(tau) = 1 + tau(lambda-1),
/// phi(tau) = 1 - tau(1-phi).
LikelihoodPair dilate(const LikelihoodPair& lr, double tau);

/// Dilating a tech along the linear likelihood-ratio path keeps p_low fixed
/// and moves p_high linearly: p_high(tau) = p_low + tau (p_high - p_low).
OutcomeTech dilate(const OutcomeTech& tech, double tau);

}  // namespace repvis
