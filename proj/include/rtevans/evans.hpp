#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "rtevans/error.hpp"
#include "rtevans/lowdense.hpp"
#include "rtevans/overdense.hpp"
#include "rtevans/params.hpp"
#include "rtevans/profile.hpp"
#include "rtevans/specfun.hpp"

namespace rtevans {

struct EvansOptions {
  double t0 = 0.05;            // left end of the low-density grid; lowered if the window needs it
  int points = 5;              // matching points
  double spread_tol = 1e-6;
  double overlap_limit = 0.0;  // refuse when max zeta R reaches this; 0 reports only
  ode::Options ode{};
};

/// One evaluation of Ev(lambda, eps) = xi (u_+ w_- - u_- w_+).
struct EvansEval {
  double lambda = 0;
  double epsilon = 0;
  double value = 0;
  std::vector<double> t_points;
  std::vector<double> point_values;
  double spread = 0;   // max pairwise difference over max(|value|, term scale)
  double zeta_r = 0;   // max of zeta R over the window, R = 15/4
  bool valid = false;
};

/// Matching window t in [1/(2 nu R), 3/(4 nu R)] with R = 15/4.
inline std::pair<double, double> matching_window(double nu) {
  return {1.0 / (2 * nu * kUniformR), 3.0 / (4 * nu * kUniformR)};
}

/// Grids depend only on t0, so they are shared process-wide.
inline std::shared_ptr<const TGrid> shared_grid(double t0, double t_max = 1e12) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, std::shared_ptr<const TGrid>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{t0, t_max}];
  if (!slot) slot = std::make_shared<const TGrid>(t0, t_max);
  return slot;
}

/// Evans function at fixed (nu, eps); caches the profile, grid and kernel across lambda.
class EvansFunction {
 public:
  EvansFunction(std::shared_ptr<const Profile> prof, double eps, EvansOptions opt = {})
      : prof_(std::move(prof)), eps_(eps), opt_(opt) {
    detail::require(eps > 0 && std::isfinite(eps), "evans needs eps > 0 (use evans_at_zero for eps = 0)");
    detail::require(opt_.points >= 2, "evans needs at least two matching points");
    const auto [lo, hi] = matching_window(prof_->nu());
    t0_ = std::min(opt_.t0, 0.75 * lo);
    for (int j = 0; j < opt_.points; ++j) t_points_.push_back(lo + (hi - lo) * j / (opt_.points - 1));
    for (double t : t_points_) {
      y_points_.push_back(-t / eps);
      xi_points_.push_back(prof_->at(-t / eps).xi);
    }
    zeta_r_ = 0;
    for (double xi : xi_points_) zeta_r_ = std::max(zeta_r_, kUniformR * eps / std::pow(xi, prof_->nu()));
    if (opt_.overlap_limit > 0 && zeta_r_ >= opt_.overlap_limit) {
      std::ostringstream os;
      os << "overlap window invalid at eps = " << eps << ": zeta R = " << zeta_r_ << "; use the spectral route";
      throw ValidationError(os.str());
    }
    grid_ = shared_grid(t0_);
    kernel_ = make_kernel(*prof_, eps, *grid_);
  }
  EvansFunction(double nu, double eps, EvansOptions opt = {})
      : EvansFunction(std::make_shared<const Profile>(nu), eps, opt) {}

  double epsilon() const { return eps_; }
  double nu() const { return prof_->nu(); }
  double t0() const { return t0_; }
  const Profile& profile() const { return *prof_; }
  const std::vector<double>& t_points() const { return t_points_; }

  PlusBranch plus(double lambda) const {
    return solve_plus({1.0, eps_, lambda, 1.0}, *prof_, y_points_, opt_.ode);
  }
  MinusBranch minus(double lambda) const {
    const auto gs = volterra_g(lambda, kernel_, *grid_);
    return reconstruct_FG(gs, kernel_, grid_);
  }

  EvansEval operator()(double lambda) const {
    detail::require(std::isfinite(lambda) && lambda > 0, "evans needs lambda > 0");
    const auto pb = plus(lambda);
    const auto mb = minus(lambda);
    EvansEval ev;
    ev.lambda = lambda;
    ev.epsilon = eps_;
    ev.t_points = t_points_;
    ev.zeta_r = zeta_r_;
    double sum = 0, scale = 0;
    for (std::size_t j = 0; j < t_points_.size(); ++j) {
      const auto m = mb.at(t_points_[j]);
      // samples come back in increasing y, i.e. decreasing t
      const auto& s = pb.samples[t_points_.size() - 1 - j];
      // u_+ = U e^{-eps y} = U e^t, so the e^t scaling of the minus branch cancels
      const double a = xi_points_[j] * s.U * m.ew(lambda);
      const double b = s.V * m.eu();
      ev.point_values.push_back(a - b);
      sum += a - b;
      scale += std::abs(a) + std::abs(b);
    }
    const double n = static_cast<double>(t_points_.size());
    ev.value = sum / n;
    const auto [mn, mx] = std::minmax_element(ev.point_values.begin(), ev.point_values.end());
    ev.spread = (*mx - *mn) / std::max({std::abs(ev.value), scale / n, 1e-300});
    ev.valid = std::isfinite(ev.value) && ev.spread <= opt_.spread_tol;
    return ev;
  }

 private:
  std::shared_ptr<const Profile> prof_;
  double eps_;
  EvansOptions opt_;
  double t0_ = 0, zeta_r_ = 0;
  std::vector<double> t_points_, y_points_, xi_points_;
  std::shared_ptr<const TGrid> grid_;
  Kernel kernel_;
};

/// Ev(lambda, eps) for one mode.
inline EvansEval evans(const ModeContext& ctx, const PhysicalParams& p, const EvansOptions& opt = {}) {
  p.validate();
  return EvansFunction(p.nu, ctx.epsilon, opt)(ctx.lambda);
}

/// U0(0, lambda) = 2^{-(lambda+1)/(2 nu)} C0(lambda), i.e. e^t (F0 + G0) at t = 0.
inline double u0_at_zero(double lambda, double nu) {
  return std::pow(2.0, -(lambda + 1) / (2 * nu)) * c0_lambda(lambda, nu);
}

/// eps -> 0 limit along the hypergeometric branch: the xi w term drops and Ev = -(lambda - 1) e^t(F0 + G0) at t = 0.
inline double evans_at_zero(double lambda, double nu) {
  const auto h = hypergeom_F0G0(lambda, nu, 0.0);
  return -(lambda - 1) * (h.eF0 + h.eG0);
}

/// Reference closed form -(lambda - 1) 2^{1-(lambda+1)/(2 nu)} C0(lambda); twice evans_at_zero.
inline double evans_at_zero_reference(double lambda, double nu) { return 2 * evans_at_zero(lambda, nu); }

/// Ev(1, eps) = 2 (eps/nu)^{1/nu}.
inline double evans_at_one(double eps, double nu) { return 2 * std::pow(eps / nu, 1 / nu); }

/// First-order root law 1 + 2 (2 eps/nu)^{1/nu} / Gamma(1 + 1/nu).
inline double lambda_asymptotic(double eps, double nu) {
  return 1 + 2 * std::pow(2 * eps / nu, 1 / nu) / specfun::gamma_fn(1 + 1 / nu);
}

struct FindOptions {
  double lo = 0.5;
  double hi = 1.5;
  double xtol = 1e-12;
  bool extend = true;  // widen hi past 3/2 when the root is not bracketed (large eps)
  double hi_max = 8.0;
};

struct RootResult {
  double lambda = 0;
  int evaluations = 0;
  double ev_lo = 0, ev_hi = 0;  // bracket values at termination
  double slope = 0;             // secant estimate of d Ev / d lambda at the root
  double residual = 0;          // |Ev(lambda)|
};

/// Zero of lambda -> Ev(lambda, eps) in [lo, hi]: bracket around the asymptotic guess,
/// bisection to xtol, one secant step.
inline RootResult find_lambda(const EvansFunction& ev, FindOptions opt = {}) {
  detail::require(opt.lo < opt.hi, "find_lambda needs lo < hi");
  const double raw_guess = lambda_asymptotic(ev.epsilon(), ev.nu());
  if (opt.extend && raw_guess > opt.hi - 0.05) opt.hi = std::max(opt.hi, 1 + 2 * (raw_guess - 1));
  RootResult rr;
  auto f = [&](double l) {
    ++rr.evaluations;
    const auto e = ev(l);
    if (!e.valid) {
      std::ostringstream os;
      os << "Evans evaluation invalid at lambda = " << l << " (spread " << e.spread << ")";
      throw NumericalError(os.str());
    }
    return e.value;
  };
  const double guess = std::clamp(raw_guess, opt.lo, opt.hi);
  double delta = std::max(0.01, 0.25 * (guess - 1));
  double a = std::max(opt.lo, guess - delta), b = std::min(opt.hi, guess + delta);
  double fa = f(a), fb = f(b);
  while (fa * fb > 0 && (a > opt.lo || b < opt.hi)) {
    delta *= 2;
    if (a > opt.lo) {
      a = std::max(opt.lo, guess - delta);
      fa = f(a);
    }
    if (fa * fb > 0 && b < opt.hi) {
      b = std::min(opt.hi, guess + delta);
      fb = f(b);
    }
  }
  // roots above 3/2 at larger eps: walk the upper end outward
  while (fa * fb > 0 && opt.extend && b < opt.hi_max) {
    a = b;
    fa = fb;
    b = std::min(opt.hi_max, 1 + 2 * (b - 1));
    fb = f(b);
  }
  if (fa * fb > 0) {
    std::ostringstream os;
    os << "no sign change of Ev in [" << opt.lo << ", " << b << "]: Ev(lo) = " << f(opt.lo) << ", Ev(hi) = " << fb;
    throw NumericalError(os.str());
  }
  // fa is cached so bisection stays one evaluation per halving
  while (b - a > opt.xtol) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) {
      a = b = m;
      fa = fb = 0;
      break;
    }
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  rr.ev_lo = fa;
  rr.ev_hi = fb;
  rr.slope = (b > a) ? (fb - fa) / (b - a) : 0.0;
  rr.lambda = (fb != fa) ? a - fa * (b - a) / (fb - fa) : 0.5 * (a + b);
  rr.residual = std::abs(f(rr.lambda));
  return rr;
}

/// B0(0) two ways: -2 int_0^inf s^{1/nu} e^{-2s} ds and -2^{-1/nu} Gamma(1 + 1/nu).
struct B0Zero {
  double quadrature;
  double closed_form;
};

inline B0Zero b0_zero(double nu) {
  detail::require(nu >= 1, "b0_zero needs nu >= 1");
  const double q = quad::gauss_kronrod_semi_infinite([nu](double s) { return std::pow(s, 1 / nu) * std::exp(-2 * s); },
                                                     0.0, {1e-14, 15})
                       .value;
  return {-2 * q, -std::pow(2.0, -1 / nu) * specfun::gamma_fn(1 + 1 / nu)};
}

/// Candidate slopes of Ev in lambda at (1, 0).
struct B0Candidates {
  double expansion;      // -2^{-1/nu} Gamma(1 + 1/nu)
  double zero_eps_form;  // slope of -(lambda-1) 2^{1-(lambda+1)/(2nu)} C0: -2^{1-1/nu} Gamma(1 + 1/nu)
  double positive;       // +2^{1-1/nu} Gamma(1 + 1/nu)
};

inline B0Candidates b0_candidates(double nu) {
  const double base = std::pow(2.0, -1 / nu) * specfun::gamma_fn(1 + 1 / nu);
  return {-base, -2 * base, 2 * base};
}

/// Central difference of Ev in lambda at lambda = 1.
inline double dlambda_evans(const EvansFunction& ev, double h = 1e-4) {
  return (ev(1 + h).value - ev(1 - h).value) / (2 * h);
}

/// Curvature coefficient C0(1, 0) from the eps = 0 Evans function:
/// -d/dlambda U0(0, lambda) at 1 = U0(0, 1) (ln 2 + gamma_E) / (2 nu).
inline double c0_one_hypergeometric(double nu) {
  const double dlog = (-std::log(2.0) + boost::math::digamma(1.0)) / (2 * nu);
  return -u0_at_zero(1.0, nu) * dlog;
}

/// Pieces of the five-integral expression for C0(1, 0).
struct C0One {
  double value = 0;
  std::array<double, 5> integrals{};
  double r0_limit = 0;
  std::vector<std::pair<double, double>> r0_samples;  // (t, R0(t))
};

namespace detail {

// K~(t) = (1/2) int_t^inf tau R(1) ds at lambda = 1, eps = 0, on a grid reaching down to t_min.
struct KTildeTable {
  std::shared_ptr<const TGrid> grid;
  std::vector<double> values;
  double operator()(double t) const { return grid->interpolate(values, t); }
};

inline KTildeTable k_tilde_one(double nu, double t_min) {
  auto grid = std::make_shared<const TGrid>(t_min, 1e12, 2.0);
  Profile prof(nu);
  const auto ker = make_kernel(prof, 0.0, *grid);
  const std::vector<double> ones(grid->size(), 1.0);
  const auto r = r_pass(ones, 1.0, ker, *grid);
  std::vector<double> tau_r(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) tau_r[i] = ker.tau[i] * r[i];
  auto integral = tail_integral(tau_r, 1.0 / (2 * nu * nu * grid->t_max()), *grid);
  for (double& v : integral) v *= 0.5;
  return {grid, integral};
}

}  // namespace detail

/// R0(t) = ln t/(2 nu) - K~(t) - B0(0) t^{-1/nu} / 2 at the given points.
inline std::vector<double> r0_values(double nu, const std::vector<double>& ts) {
  const double tmin = *std::min_element(ts.begin(), ts.end());
  const auto kt = detail::k_tilde_one(nu, tmin);
  const double b0 = b0_zero(nu).closed_form;
  std::vector<double> out;
  for (double t : ts) out.push_back(std::log(t) / (2 * nu) - kt(t) - 0.5 * b0 * std::pow(t, -1 / nu));
  return out;
}

/// The five-integral quadrature for C0(1, 0).
inline C0One c0_one(double nu) {
  detail::require(nu > 1, "c0_one needs nu > 1");
  constexpr double t_min = 1e-12;
  const auto kt = detail::k_tilde_one(nu, t_min);
  const double b0 = b0_zero(nu).closed_form;
  auto r0 = [&](double t) { return std::log(t) / (2 * nu) - kt(t) - 0.5 * b0 * std::pow(t, -1 / nu); };
  C0One c;
  for (double t : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12}) c.r0_samples.push_back({t, r0(t)});
  // R0 approaches its limit like t^{1/nu}; extrapolate from the two smallest samples
  const auto& [ta, ra] = c.r0_samples[c.r0_samples.size() - 2];
  const auto& [tb, rb] = c.r0_samples.back();
  const double xa = std::pow(ta, 1 / nu), xb = std::pow(tb, 1 / nu);
  c.r0_limit = rb - (ra - rb) * xb / (xa - xb);
  if (!std::isfinite(c.r0_limit) || std::abs(ra - rb) > 1e-2)
    throw NumericalError("R0(t) does not settle as t -> 0");

  const quad::Tolerance tol{1e-12, 15};
  c.integrals[0] = b0_zero(nu).quadrature / -2.0;
  // int_0^inf ln s e^{-2s} ds = -(gamma_E + ln 2)/2, split at 1 for the log endpoint
  const double ilog = quad::gauss_kronrod([](double u) { return -u * std::exp(-2 * std::exp(-u)) * std::exp(-u); },
                                          0.0, 60.0, tol)
                          .value +
                      quad::gauss_kronrod([](double s) { return std::log(s) * std::exp(-2 * s); }, 1.0, 60.0, tol).value;
  c.integrals[1] = -(2 / nu) * ilog;
  c.integrals[2] = (1 / nu) * quad::gauss_kronrod(
                                  [&](double s) { return std::pow(s, 1 / nu - 1) * std::exp(-2 * s) * kt(s); }, 1.0,
                                  40.0, tol)
                                  .value;
  c.integrals[3] = b0 / (2 * nu) *
                   quad::gauss_kronrod([](double s) { return s == 0 ? 2.0 : -std::expm1(-2 * s) / s; }, 0.0, 1.0, tol).value;
  // s = u^nu removes the s^{1/nu - 1} weight; below u_min use R0 ~ its limit
  const double u_min = std::pow(t_min, 1 / nu) * 1.0000001;
  auto inner = [&](double u) {
    const double s = std::pow(u, nu);
    return nu * std::exp(-2 * s) * (std::log(s) / (2 * nu) - r0(s));
  };
  double i5 = quad::gauss_kronrod(inner, u_min, 1.0, tol).value;
  // int_0^{u_min} nu (ln u / 2 - R0(0)) du
  i5 += nu * (0.5 * (u_min * std::log(u_min) - u_min) - c.r0_limit * u_min);
  c.integrals[4] = i5 / nu;
  c.value = 0;
  for (double v : c.integrals) c.value += v;
  return c;
}

/// Reference first-order correction B0(eps) = B0(0) + eps^{1/nu}/(nu-1) + 2 (eps/nu)^{1/nu} lim R0.
inline double b0_eps_reference(double nu, double eps, double r0_limit) {
  return b0_zero(nu).closed_form + std::pow(eps, 1 / nu) / (nu - 1) + 2 * std::pow(eps / nu, 1 / nu) * r0_limit;
}

/// Two-term root prediction -Ev(1,eps)/B0(eps) - C0 B0(0)^{-3} Ev(1,eps)^2.
inline double lambda_two_term(double nu, double eps, double b0_eps, double c0) {
  const double e1 = evans_at_one(eps, nu);
  const double b00 = b0_zero(nu).closed_form;
  return 1 - e1 / b0_eps - c0 * e1 * e1 / (b00 * b00 * b00);
}

}  // namespace rtevans
