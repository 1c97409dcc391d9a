#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "rtevans/error.hpp"
#include "rtevans/quadrature.hpp"

namespace rtevans::specfun {

namespace detail {

// sin(pi x) with exact argument reduction, accurate near the integers.
inline double sin_pi(double x) {
  const double n = std::round(x);
  const double s = std::sin(std::numbers::pi * (x - n));
  return (static_cast<long long>(n) % 2 == 0) ? s : -s;
}

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::round(x); }

}  // namespace detail

/// Gamma function on the real line; throws at the poles.
inline double gamma_fn(double x) {
  if (!std::isfinite(x)) throw ValidationError("gamma_fn needs a finite argument");
  if (detail::is_nonpositive_integer(x)) throw ValidationError("gamma_fn pole at nonpositive integer");
  return std::tgamma(x);
}

/// 1/Gamma(x), zero at the poles.
inline double rgamma(double x) {
  if (detail::is_nonpositive_integer(x)) return 0.0;
  return 1.0 / gamma_fn(x);
}

/// Parameters of a Kummer function evaluation.
struct KummerParams {
  double a;
  double b;
  double z;
};

inline constexpr double kZSwitch = 30.0;  // connection formula below, asymptotic series above
inline constexpr double kZMax = 700.0;

/// M(a, b, z) by its power series.
inline double kummer_m(const KummerParams& p) {
  const auto [a, b, z] = p;
  if (detail::is_nonpositive_integer(b)) throw ValidationError("kummer_m: b is a nonpositive integer");
  if (!(z >= 0.0)) throw ValidationError("kummer_m needs z >= 0");
  if (z > kZMax) throw NumericalError("kummer_m: z beyond the overflow-safe range");
  double term = 1.0, sum = 1.0;
  for (int n = 0; n < 5000; ++n) {
    term *= (a + n) / (b + n) * z / (n + 1.0);
    sum += term;
    if (term == 0.0) return sum;
    if (std::abs(term) < 1e-17 * std::abs(sum) && n > z) return sum;
  }
  throw NumericalError("kummer_m series did not converge");
}

namespace detail {

inline void check_b(double b) {
  if (std::abs(b - std::round(b)) < 1e-6) throw ValidationError("kummer_u: b within 1e-6 of an integer");
}

inline double u_connection(double a, double b, double z) {
  const double pre = std::numbers::pi / sin_pi(b);
  const double t1 = kummer_m({a, b, z}) * rgamma(1.0 + a - b) * rgamma(b);
  double t2 = 0.0;
  const double ra = rgamma(a);
  if (ra != 0.0 && z > 0.0) t2 = std::pow(z, 1.0 - b) * kummer_m({1.0 + a - b, 2.0 - b, z}) * ra * rgamma(2.0 - b);
  return pre * (t1 - t2);
}

// z^{-a} sum (a)_n (1+a-b)_n (-1/z)^n / n!, truncated at the smallest term.
inline double u_asymptotic(double a, double b, double z) {
  double term = 1.0, sum = 1.0, prev = 1.0;
  for (int n = 0; n < 200; ++n) {
    const double next = term * (a + n) * (1.0 + a - b + n) / ((n + 1.0) * -z);
    if (std::abs(next) > std::abs(prev) && n > 2) break;
    sum += next;
    prev = next;
    term = next;
    if (next == 0.0 || std::abs(next) < 1e-17 * std::abs(sum)) break;
  }
  return std::pow(z, -a) * sum;
}

// U(a,b,z) = z^{1-b}/Gamma(c+1) int_0^inf exp(-z u^{1/c}) (1 + u^{1/c})^{-a} du with c = 1+a-b > 0.
inline double u_integral(double a, double b, double z) {
  const double c = 1.0 + a - b;
  auto f = [&](double w) {
    if (w <= 0.0) return 1.0;
    const double t = std::pow(w, 1.0 / c);  // after u = w z^{-c}
    return std::exp(-t - a * std::log1p(t / z));
  };
  const auto r = quad::gauss_kronrod_semi_infinite(f, 0.0, {1e-13, 12});
  return std::pow(z, 1.0 - b - c) * r.value * rgamma(c + 1.0);
}

}  // namespace detail

/// U(a, b, z), the solution of Kummer's equation decaying like z^{-a}.
///
/// Connection formula for small z, an integral representation for moderate z
/// (where the connection formula cancels like e^z), asymptotic series beyond kZSwitch.
inline double kummer_u(const KummerParams& p) {
  const auto [a, b, z] = p;
  detail::check_b(b);
  if (!(z >= 0.0)) throw ValidationError("kummer_u needs z >= 0");
  if (z == 0.0) {
    if (b >= 1.0) throw ValidationError("kummer_u(a, b, 0) is infinite for b >= 1");
    return gamma_fn(1.0 - b) * rgamma(1.0 + a - b);
  }
  if (z > kZSwitch) return detail::u_asymptotic(a, b, z);
  if (z > 2.0 && 1.0 + a - b > 0.0) return detail::u_integral(a, b, z);
  return detail::u_connection(a, b, z);
}

/// dU/dz = -a U(a+1, b+1, z).
inline double kummer_u_prime(const KummerParams& p) {
  if (p.a == 0.0) return 0.0;
  return -p.a * kummer_u({p.a + 1.0, p.b + 1.0, p.z});
}

/// dM/dz = (a/b) M(a+1, b+1, z).
inline double kummer_m_prime(const KummerParams& p) {
  return p.a / p.b * kummer_m({p.a + 1.0, p.b + 1.0, p.z});
}

}  // namespace rtevans::specfun
