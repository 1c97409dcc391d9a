#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <string>
#include <vector>

#include "rtevans/evans.hpp"

namespace rtevans {

struct ExpansionPoint {
  double epsilon = 0;
  double lambda = 0;
  double delta = 0;            // lambda - lambda_asymptotic
  double ev_one = 0;           // Ev(1, eps)
  double b0_eps = 0;           // d Ev / d lambda at (1, eps), central difference
  double delta_predicted = 0;  // two-term prediction minus the first-order law
};

struct ExpansionReport {
  double nu = 2;
  std::vector<ExpansionPoint> points;
  double slope = 0;          // log-log slope of |delta| against eps
  double c_zero = 0;         // max (lambda - 1) / eps^{1/nu}
  double b0_from_slope = 0;  // d Ev / d lambda extrapolated to eps = 0
  double b0_from_roots = 0;  // -Ev(1, eps) / (lambda - 1) extrapolated to eps = 0
  std::string slope_match, roots_match;
  bool b0_consistent = false;
  double c0 = 0;                      // curvature constant used in the prediction
  double second_order_measured = 0;   // coefficient of eps^{2/nu} in delta
  double second_order_predicted = 0;
};

namespace detail {

// least squares d = a x^2 + b x^3, returns a
inline double second_order_coefficient(const std::vector<double>& x, const std::vector<double>& d) {
  double s44 = 0, s45 = 0, s55 = 0, s4d = 0, s5d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = x[i] * x[i], b = a * x[i];
    s44 += a * a;
    s45 += a * b;
    s55 += b * b;
    s4d += a * d[i];
    s5d += b * d[i];
  }
  return (s4d * s55 - s5d * s45) / (s44 * s55 - s45 * s45);
}

// value at x = 0 of the line through the two samples with the smallest x
inline double extrapolate_to_zero(std::vector<std::pair<double, double>> xy) {
  std::sort(xy.begin(), xy.end());
  const auto [x0, y0] = xy[0];
  const auto [x1, y1] = xy[1];
  return y0 - (y1 - y0) * x0 / (x1 - x0);
}

inline std::string nearest_b0(double value, double nu, double rel_tol) {
  const auto c = b0_candidates(nu);
  const std::pair<const char*, double> named[] = {{"expansion", c.expansion}, {"zero_eps_form", c.zero_eps_form}, {"positive", c.positive}};
  for (const auto& [name, v] : named)
    if (std::abs(value - v) <= rel_tol * std::abs(v)) return name;
  return "none";
}

}  // namespace detail

inline std::vector<double> log_spaced(double lo, double hi, int n) {
  detail::require(lo > 0 && hi > lo && n >= 2, "log_spaced needs 0 < lo < hi and n >= 2");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return out;
}

/// Root sweep over eps with the first/second-order comparisons. c0 is the curvature constant
/// inserted into the two-term law; pass c0_one(nu).value or c0_one_hypergeometric(nu).
inline ExpansionReport expansion_check(double nu, const std::vector<double>& eps, double c0, unsigned jobs = 1,
                                       double match_tol = 0.02) {
  detail::require(eps.size() >= 3, "expansion check needs at least three eps values");
  ExpansionReport rep;
  rep.nu = nu;
  rep.c0 = c0;
  rep.points.resize(eps.size());
  const auto prof = std::make_shared<const Profile>(nu);
  auto work = [&](std::size_t i) {
    const EvansFunction ev(prof, eps[i]);
    auto& p = rep.points[i];
    p.epsilon = eps[i];
    p.lambda = find_lambda(ev).lambda;
    p.delta = p.lambda - lambda_asymptotic(eps[i], nu);
    p.ev_one = ev(1.0).value;
    p.b0_eps = dlambda_evans(ev);
  };
  const unsigned n = std::max(1u, jobs);
  std::vector<std::future<void>> fs;
  for (unsigned w = 0; w < n; ++w)
    fs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < eps.size(); i += n) work(i);
    }));
  for (auto& f : fs) f.get();

  const double b00 = b0_zero(nu).closed_form;
  std::vector<std::pair<double, double>> slope_pts, root_pts;
  std::vector<double> xs, dm, dp;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& p : rep.points) {
    const double x = std::pow(p.epsilon, 1 / nu);
    rep.c_zero = std::max(rep.c_zero, (p.lambda - 1) / x);
    slope_pts.push_back({x, p.b0_eps});
    root_pts.push_back({x, -p.ev_one / (p.lambda - 1)});
    p.delta_predicted = -p.ev_one / p.b0_eps - c0 * p.ev_one * p.ev_one / (b00 * b00 * b00) -
                        (lambda_asymptotic(p.epsilon, nu) - 1);
    xs.push_back(x);
    dm.push_back(p.delta);
    dp.push_back(p.delta_predicted);
    const double lx = std::log(p.epsilon), ly = std::log(std::abs(p.delta));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(rep.points.size());
  rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  rep.b0_from_slope = detail::extrapolate_to_zero(slope_pts);
  rep.b0_from_roots = detail::extrapolate_to_zero(root_pts);
  rep.slope_match = detail::nearest_b0(rep.b0_from_slope, nu, match_tol);
  rep.roots_match = detail::nearest_b0(rep.b0_from_roots, nu, match_tol);
  rep.b0_consistent = rep.slope_match != "none" && rep.slope_match == rep.roots_match;
  rep.second_order_measured = detail::second_order_coefficient(xs, dm);
  rep.second_order_predicted = detail::second_order_coefficient(xs, dp);
  return rep;
}

}  // namespace rtevans
