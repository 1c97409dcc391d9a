#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rtevans/error.hpp"

namespace rtevans::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

struct Tolerance {
  double rel = 1e-13;
  unsigned max_depth = 20;
};

/// Adaptive 21-point Gauss-Kronrod; infinite limits are mapped by Boost.
template <class F>
Result gauss_kronrod(F&& f, double a, double b, Tolerance tol = {}) {
  if (a == b) return {};
  Result r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, tol.max_depth, tol.rel,
                                                                          &r.error);
  if (!std::isfinite(r.value)) throw NumericalError("quadrature produced a non-finite value");
  return r;
}

template <class F>
Result gauss_kronrod_semi_infinite(F&& f, double a, Tolerance tol = {}) {
  return gauss_kronrod(f, a, std::numeric_limits<double>::infinity(), tol);
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

template <unsigned N>
Rule gauss_legendre() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  Rule r;
  // Boost stores the nonnegative half; x[0] is the centre node when N is odd
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] == 0.0) continue;
    r.nodes.push_back(-x[i]);
    r.weights.push_back(w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.nodes.push_back(x[i]);
    r.weights.push_back(w[i]);
  }
  return r;
}

/// Fixed-rule integral of f over [a, b].
template <class F>
double fixed(F&& f, const Rule& rule, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(c + h * rule.nodes[i]);
  return s * h;
}

}  // namespace rtevans::quad
