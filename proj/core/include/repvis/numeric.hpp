#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace repvis {

/// Central knobs for tolerances used across the library.  Every identity
/// check, finite-difference cross-check and sign classification reads its
/// tolerance from here so a caller can tighten or relax them in one place.
struct NumericSettings {
  double identity_tol = 1e-12;    ///< exact algebraic identities (martingale, variance forms)
  double fd_step = 1e-6;          ///< central finite-difference step in the belief
  double fd_rel_tol = 1e-6;       ///< relative tolerance for analytic-vs-FD checks
  double kernel_fd_step = 1e-5;   ///< step when differencing in a visibility level
  double sign_zero_band = 1e-10;  ///< |x| below this classifies as sign 0
  double boundary_probe = 1e-4;   ///< interior probe distance for boundary limits
  double boundary_tol = 1e-3;     ///< tolerance when matching boundary limits

  static const NumericSettings& defaults() {
    static const NumericSettings s{};
    return s;
  }
};

/// Three-way sign with a configurable zero band.
inline int classify_sign(double x, double zero_band) {
  if (std::abs(x) < zero_band) return 0;
  return x > 0 ? +1 : -1;
}

/// Relative agreement with an absolute floor: passes when
/// |a-b| <= tol * max(1, |a|, |b|).
inline bool close_rel(double a, double b, double tol) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

inline void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::domain_error(std::string(name) + " must lie in [0,1], got " +
                            std::to_string(p));
}

inline void require_interior(double pi, const char* name = "pi") {
  if (!(pi > 0.0 && pi < 1.0))
    throw std::domain_error(std::string(name) + " must lie in (0,1), got " +
                            std::to_string(pi));
}

}  // namespace repvis
