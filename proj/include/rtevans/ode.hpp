#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "rtevans/error.hpp"

namespace rtevans::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
  double rtol = 1e-11;
  double atol = 1e-13;
  double h_init = 1e-3;
  std::size_t max_steps = 2'000'000;
};

/// Dormand-Prince 5(4) with dense output; returns the state at each of `times`
/// (monotone along the direction of integration, times.front() = t0).
template <std::size_t N, class F>
std::vector<State<N>> solve_at(F&& f, const State<N>& y0, const std::vector<double>& times,
                               const Options& opt = {}) {
  namespace oi = boost::numeric::odeint;
  if (times.empty()) return {};
  auto rhs = [&f](const State<N>& y, State<N>& dy, double t) { dy = f(t, y); };
  auto stepper = oi::make_dense_output(opt.atol, opt.rtol, oi::runge_kutta_dopri5<State<N>>());
  std::vector<State<N>> out;
  out.reserve(times.size());
  State<N> y = y0;
  const double dir = times.back() >= times.front() ? 1.0 : -1.0;
  try {
    oi::integrate_times(stepper, rhs, y, times.begin(), times.end(), dir * std::abs(opt.h_init),
                        [&out](const State<N>& s, double) { out.push_back(s); },
                        oi::max_step_checker(opt.max_steps));
  } catch (const oi::step_adjustment_error& e) {
    throw NumericalError(std::string("ODE step adjustment failed: ") + e.what());
  } catch (const oi::no_progress_error& e) {
    throw NumericalError(std::string("ODE integrator stalled: ") + e.what());
  }
  for (const auto& s : out)
    for (double v : s)
      if (!std::isfinite(v)) throw NumericalError("ODE solution became non-finite");
  return out;
}

/// State at t1.
template <std::size_t N, class F>
State<N> integrate(F&& f, double t0, const State<N>& y0, double t1, const Options& opt = {}) {
  return solve_at<N>(f, y0, {t0, t1}, opt).back();
}

}  // namespace rtevans::ode
