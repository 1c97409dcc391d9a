#pragma once

#include <cmath>
#include <string>

#include "rtevans/error.hpp"

namespace rtevans {

/// Constants of one ablation-front configuration.
struct PhysicalParams {
  double nu = 2.0;     // thermal conduction index
  double g = 1.0;      // gravity
  double L0 = 1.0;     // profile length scale
  double rho_a = 1.0;  // ablated-fluid density

  void validate() const {
    detail::require(std::isfinite(nu) && nu > 1.0, "nu must be > 1, got " + std::to_string(nu));
    detail::require(std::isfinite(g) && g > 0.0, "g must be > 0");
    detail::require(std::isfinite(L0) && L0 > 0.0, "L0 must be > 0");
    detail::require(std::isfinite(rho_a) && rho_a > 0.0, "rho_a must be > 0");
  }
};

/// Effective length and the growth-rate cap.
struct ScaleConstants {
  double L_eff;
  double Lambda;
  double xi_star;   // argmax of k0_scaled
  double k0_max;    // max of k0_scaled
};

inline ScaleConstants l_eff_and_cap(const PhysicalParams& p) {
  p.validate();
  const double nu = p.nu;
  const double k0_max = std::pow(nu, nu) / std::pow(nu + 1.0, nu + 1.0);
  const double L_eff = p.L0 / k0_max;
  return {L_eff, std::sqrt(p.g / L_eff), nu / (nu + 1.0), k0_max};
}

/// One transverse mode with a trial eigen-parameter lambda = g k / gamma^2.
struct ModeContext {
  double k;
  double epsilon;
  double lambda;
  double gamma;

  static ModeContext from_k(const PhysicalParams& p, double k, double lambda) {
    detail::require(k > 0.0 && lambda > 0.0, "mode needs k > 0 and lambda > 0");
    return {k, k * p.L0, lambda, std::sqrt(p.g * k / lambda)};
  }
};

}  // namespace rtevans
