#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "repvis/numeric.hpp"
#include "repvis/posterior.hpp"

namespace repvis {

/// Private-signal technology: P(s = good | H) = q_high, P(s = good | L) = q_low.
struct SignalTech {
  double q_high = 0.5;
  double q_low = 0.5;

  SignalTech() = default;
  SignalTech(double q_high_, double q_low_) : q_high(q_high_), q_low(q_low_) {
    if (!(q_low > 0.0 && q_high < 1.0 && q_low <= q_high))
      throw std::domain_error("need 0 < q_low <= q_high < 1");
  }

  bool informative() const { return q_high > q_low; }
  /// Private posterior on the high type after a good / bad signal.
  double posterior_good(double pi) const;
  double posterior_bad(double pi) const;
};

/// Survival probabilities and their reputation slopes at one belief.
struct KernelPoint {
  double sigma_success = 1.0;
  double sigma_failure = 1.0;
  double dsigma_success_dpi = 0.0;
  double dsigma_failure_dpi = 0.0;
};

/// Visibility kernel sigma(y, pi): probability that an outcome y survives on
/// the public record at reputation pi.
///
/// Variants: Constant levels, a Tabulated curve, and a SecurityFloor whose
/// failure visibility is a mandated disclosure floor kappa plus residual
/// detection: sigma(0, .) = kappa + (1-kappa)*delta.
///
/// Tabulated kernels interpolate the knot values with a C1 cubic Hermite
/// whose knot slopes are central differences on the grid spacing (one-sided
/// at the ends), so the reported reputation slope is the exact derivative of
/// the evaluated curve.
class VisibilityKernel {
 public:
  enum class Kind { Constant, Tabulated, SecurityFloor };

  struct Knot {
    double pi;
    double sigma_success;
    double sigma_failure;
  };

  VisibilityKernel() : VisibilityKernel(constant(1.0, 1.0)) {}

  static VisibilityKernel constant(double sigma_success, double sigma_failure);
  static VisibilityKernel tabulated(std::vector<Knot> knots);
  static VisibilityKernel security_floor(double kappa, double delta,
                                         double sigma_success);

  KernelPoint at(double pi) const;
  Kind kind() const { return kind_; }
  bool constant_levels() const { return kind_ != Kind::Tabulated; }

  // Parameters of the parametric variants (throws for Tabulated).
  double kappa() const;
  double delta() const;
  double level_success() const;
  double level_failure() const;
  const std::vector<Knot>& knots() const;

 private:
  explicit VisibilityKernel(Kind kind) : kind_(kind) {}

  Kind kind_;
  double sigma_success_ = 1.0;
  double sigma_failure_ = 1.0;
  double kappa_ = 0.0;
  double delta_ = 0.0;
  std::vector<Knot> knots_;
  std::vector<double> slope_success_;  // Hermite knot slopes
  std::vector<double> slope_failure_;
};

/// Additive visibility reform: sigma_post(y, pi) = sigma_pre(y, pi) + Delta_y(pi)
/// with Delta_0 >= Delta_1 >= 0 on the validation grid.
struct ReformShift {
  std::function<double(double)> delta_failure;  // Delta_0(pi)
  std::function<double(double)> delta_success;  // Delta_1(pi)

  static ReformShift constants(double delta_failure_level, double delta_success_level);
};

/// Applies the shift.  Constant kernels with constant shifts stay constant;
/// anything else is sampled onto `grid` as a Tabulated kernel.  Throws
/// std::invalid_argument when a shifted value exceeds 1, a shift is negative,
/// or Delta_0 < Delta_1 anywhere on the grid.
VisibilityKernel apply_reform(const VisibilityKernel& kernel, const ReformShift& shift,
                              const std::vector<double>& grid = {});

/// Career value V(pi) with slope and curvature evaluators.  Construction
/// verifies V' > 0 at a dense probe grid; a flat or decreasing candidate is
/// rejected.
class ValueFunction {
 public:
  enum class Kind { Linear, Quadratic, PiecewiseLinear };

  ValueFunction() : ValueFunction(linear(1.0, 0.0)) {}

  static ValueFunction linear(double slope, double intercept);
  /// V(x) = c0 + c1 x + c2 x^2.
  static ValueFunction quadratic(double c0, double c1, double c2);
  static ValueFunction piecewise_linear(std::vector<std::pair<double, double>> knots);

  double value(double x) const;
  double slope(double x) const;
  double curvature(double x) const;
  /// sup |V''| over (0,1); for piecewise-linear this is 0 by convention
  /// (no curvature inside segments).
  double curvature_sup() const;

  Kind kind() const { return kind_; }
  double coeff0() const { return c0_; }
  double coeff1() const { return c1_; }
  double coeff2() const { return c2_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  explicit ValueFunction(Kind kind) : kind_(kind) {}
  void check_increasing() const;

  Kind kind_;
  double c0_ = 0.0, c1_ = 1.0, c2_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
};

/// One action available to the expert.  Either a full outcome technology
/// (type-conditional success probabilities; likelihood ratios derived) or a
/// raw likelihood-ratio pair with an explicitly supplied mixture success
/// probability.  Raw pairs cover experiments that no (p_high, p_low) pair can
/// generate, e.g. an arm informative on failures only; their mixture is flat
/// in the belief unless a slope is given.
class Arm {
 public:
  Arm() : Arm(OutcomeTech{0.5, 0.5}) {}
  explicit Arm(const OutcomeTech& tech) : has_tech_(true), tech_(tech) {}
  Arm(const LikelihoodPair& lr, double mix_success, double mix_slope = 0.0);

  bool from_tech() const { return has_tech_; }
  const OutcomeTech& tech() const;
  LikelihoodPair ratios() const { return has_tech_ ? tech_.ratios() : lr_; }
  double mixture(double pi) const;
  /// d mixture / d pi (p_high - p_low for tech arms).
  double mixture_slope() const { return has_tech_ ? tech_.mixture_slope() : mix_slope_; }
  bool informative() const { return ratios().informative(); }

  double raw_mix() const { return mix_; }

 private:
  bool has_tech_;
  OutcomeTech tech_;
  LikelihoodPair lr_;
  double mix_ = 0.5;
  double mix_slope_ = 0.0;
};

/// Bundle of primitives for one decision episode.
struct Scenario {
  OutcomeTech risky;
  Arm safe;
  SignalTech signal;
  VisibilityKernel vis_risky;
  VisibilityKernel vis_safe;
  ValueFunction value;

  void validate() const;
};

enum class Policy { AlwaysRisky, RiskyIffGood, NeverRisky };

const char* to_string(Policy p);

/// Expected continuation value of an arm at public belief pi:
///   p * sigma(1,pi) * V(pi_plus) + (1-p) * sigma(0,pi) * V(pi_minus)
/// where p defaults to the arm's public mixture and the posteriors always use
/// the arm's public likelihood ratios.  `private_success_prob` overrides p
/// only (used by the cutoff policy when conditioning on the expert's signal).
enum class ArmChoice { Risky, Safe };

double continuation_value(double pi, ArmChoice arm, const Scenario& scenario,
                          std::optional<double> private_success_prob = std::nullopt);

/// Value gap Delta(pi) = U(R | pi) - U(S | pi) at public mixtures.
double delta(double pi, const Scenario& scenario);

/// Signal-conditional value gap used by the cutoff policy.
double delta_given_signal(double pi, bool good_signal, const Scenario& scenario);

/// Exact analytic d Delta / d pi, including the direct terms from
/// reputation-dependent kernels, cross-checked against a central finite
/// difference of delta.  Throws std::logic_error when the two routes
/// disagree beyond fd_rel_tol.
double delta_prime_exact(double pi, const Scenario& scenario,
                         const NumericSettings& ns = NumericSettings::defaults());

/// As above without the finite-difference cross-check (hot loops).
double delta_prime_exact_unchecked(double pi, const Scenario& scenario);

/// Monotone recommendation rule at belief pi.  Ties (Delta = 0) resolve to
/// risky.  The good-signal comparison governs, so the returned policy is
/// monotone in the signal by construction.
Policy cutoff_policy(double pi, const Scenario& scenario);

}  // namespace repvis
