#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rtevans/error.hpp"
#include "rtevans/ode.hpp"
#include "rtevans/params.hpp"
#include "rtevans/profile.hpp"
#include "rtevans/quadrature.hpp"

namespace rtevans {

/// One point of the dense-side branch, in the e^{-eps y}-stripped variables.
struct PlusSample {
  double y;
  double U;
  double V;
};

/// Branch bounded as y -> +inf, normalized by U_plus -> 1 there.
struct PlusBranch {
  double epsilon = 0;
  double lambda = 0;
  double y_right = 0;  // where (U, V) = (1, lambda - 1) was imposed
  std::vector<PlusSample> samples;

  double u(std::size_t i) const { return samples[i].U * std::exp(-epsilon * samples[i].y); }
  double v(std::size_t i) const { return samples[i].V * std::exp(-epsilon * samples[i].y); }
  double du(std::size_t i, double xi) const { return -epsilon * lambda * u(i) + epsilon / xi * v(i); }
};

/// Right-hand side of the system for (U, V) = (u, v) e^{eps y}.
inline ode::State<2> plus_rhs(double eps, double lambda, double xi, const ode::State<2>& s) {
  return {eps * (1 - lambda) * s[0] + eps / xi * s[1], eps * (lambda + 1) * s[1] + eps * (1 - lambda * lambda) * xi * s[0]};
}

inline double plus_y_right(const Profile& prof) { return prof.y_of_xi(1 - 1e-10); }

/// Integrate backward from y_right with initial data (U, V); returns samples at `ys`.
inline PlusBranch solve_plus_from(double eps, double lambda, const Profile& prof, std::span<const double> ys,
                                  ode::State<2> start, const ode::Options& opt = {}) {
  detail::require(eps >= 0 && std::isfinite(lambda), "solve_plus needs eps >= 0 and finite lambda");
  PlusBranch br{eps, lambda, plus_y_right(prof), {}};
  std::vector<double> order(ys.begin(), ys.end());
  std::sort(order.begin(), order.end(), std::greater<>());
  detail::require(order.empty() || order.front() <= br.y_right, "sample points lie right of y_right");
  if (!order.empty() && prof.at(order.back()).xi < 1e-300)
    throw ValidationError("branch window reaches where xi underflows");
  std::vector<double> times{br.y_right};
  times.insert(times.end(), order.begin(), order.end());
  auto f = [&](double y, const ode::State<2>& s) { return plus_rhs(eps, lambda, prof.at(y).xi, s); };
  const auto states = ode::solve_at<2>(f, start, times, opt);
  for (std::size_t i = 1; i < times.size(); ++i) br.samples.push_back({times[i], states[i][0], states[i][1]});
  std::reverse(br.samples.begin(), br.samples.end());
  return br;
}

/// Dense-side branch at the points `ys`, samples in increasing y.
inline PlusBranch solve_plus(const ModeContext& ctx, const Profile& prof, std::span<const double> ys,
                             const ode::Options& opt = {}) {
  return solve_plus_from(ctx.epsilon, ctx.lambda, prof, ys, {1.0, ctx.lambda - 1.0}, opt);
}

/// First-order corrections, U = 1 + eps u1 + ..., V = lambda - 1 + eps v1 + ...
struct FirstOrder {
  double u1;
  double v1;
};

inline FirstOrder u1_v1_closed_form(double lambda, double nu, double xi) {
  detail::require(xi > 0 && xi <= 1, "u1_v1 needs 0 < xi <= 1");
  const double p1 = std::pow(xi, nu + 1), p0 = std::pow(xi, nu);
  return {(1 - lambda) / (nu + 1) * (1 - p1) / p1, (1 - lambda * lambda) / nu * (1 - p0) / p0};
}

/// R_lambda = (|lambda - 1| + 1) max(1, |lambda + 1|).
inline double r_lambda(double lambda) { return (std::abs(lambda - 1) + 1) * std::max(1.0, std::abs(lambda + 1)); }

inline constexpr double kUniformR = 15.0 / 4.0;  // covers lambda in [1/2, 3/2]

/// R_lambda^j.
inline double series_bound(double lambda, int j) {
  detail::require(j >= 1, "series_bound needs j >= 1");
  return std::pow(r_lambda(lambda), j);
}

/// Partial sums of the small-zeta series for (U_plus, V_plus).
struct SeriesExpansion {
  double zeta;
  double A_value;  // zeta A(zeta, eps) truncated at order J
  double B_value;
  double U;
  double V;
  double tail_bound;
};

namespace detail {

// a_1, b_1 of the series coefficients
inline std::pair<double, double> ab1(double lambda, double nu, double eta) {
  // (1 - eta^p)/(p (1 - eta)) written to stay accurate as eta -> 1
  auto q = [eta](double p) { return eta == 1.0 ? 1.0 : -std::expm1(p * std::log(eta)) / (p * (1 - eta)); };
  return {q(nu + 1), (1 + lambda) * q(nu)};
}

}  // namespace detail

/// Series through order J in {1, 2}; refuses zeta R_lambda >= 1.
inline SeriesExpansion series_expansion(double eps, double lambda, double nu, double xi, int order = 1) {
  detail::require(order == 1 || order == 2, "series_expansion supports order 1 or 2");
  detail::require(xi > 0 && xi <= 1, "series_expansion needs 0 < xi <= 1");
  const double R = r_lambda(lambda);
  const double zeta = eps / std::pow(xi, nu);
  if (zeta * R >= 1) throw ValidationError("series_expansion outside its region: zeta R_lambda >= 1");
  auto [a1, b1] = detail::ab1(lambda, nu, xi);
  double A = a1 * zeta, B = b1 * zeta;
  if (order == 2 && xi < 1) {
    // u2 = (1-lambda) int_1^xi (b1 - (lambda-1) a1) / eta^{2nu+2}, v2 likewise with eta^{2nu+1}
    auto c = [&](double eta) {
      auto [a, b] = detail::ab1(lambda, nu, eta);
      return b - (lambda - 1) * a;
    };
    const double iu = quad::gauss_kronrod([&](double e) { return c(e) / std::pow(e, 2 * nu + 2); }, 1.0, xi).value;
    const double iv = quad::gauss_kronrod([&](double e) { return c(e) / std::pow(e, 2 * nu + 1); }, 1.0, xi).value;
    const double a2 = iu * std::pow(xi, 2 * nu + 1) / (1 - xi);
    const double b2 = (lambda + 1) * iv * std::pow(xi, 2 * nu) / (1 - xi);
    A += a2 * zeta * zeta;
    B += b2 * zeta * zeta;
  }
  // the constant in |a_j| <= A R^j is not fixed; calibrate it on j = 1
  const double Aconst = std::max(std::abs(a1), std::abs(b1)) / R;
  const double tail = Aconst * std::pow(R * zeta, order + 1) / (1 - R * zeta);
  return {zeta, A, B, 1 + (1 - xi) * (1 - lambda) / xi * A, lambda - 1 + (1 - lambda) * (1 - xi) * B, tail};
}

}  // namespace rtevans
