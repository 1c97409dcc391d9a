#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rtevans/error.hpp"
#include "rtevans/params.hpp"
#include "rtevans/quadrature.hpp"

namespace rtevans {

/// Profile value at one scaled coordinate y = x / L0.
struct ProfileEval {
  double xi;            // density fraction in (0, 1)
  double xi_dot;        // d xi / dy = xi^{nu+1} (1 - xi)
  double k0_scaled;     // xi^nu (1 - xi); physical k0 = k0_scaled / L0
  double one_minus_xi;  // 1 - xi without cancellation
  double log_xi;        // ln xi without underflow
};

/// Kull-Anisimov profile xi' = xi^{nu+1}(1 - xi), gauge xi(0) = 1/2.
///
/// Internally parameterized by the logit l = ln(xi / (1 - xi)), in which
/// dy/dl = xi^{-nu} = (1 + e^{-l})^nu is smooth. The table stores y at uniform
/// logit nodes; inversion is cubic Hermite (exact slopes) plus Newton.
class Profile {
 public:
  explicit Profile(double nu) : nu_(nu) {
    detail::require(std::isfinite(nu) && nu > 1.0, "nu must be > 1");
    build_table();
  }
  explicit Profile(const PhysicalParams& p) : Profile(p.nu) { p.validate(); }

  double nu() const { return nu_; }

  ProfileEval at(double y) const { return eval_logit(logit_of_y(y)); }

  /// Logit of xi at scaled coordinate y.
  double logit_of_y(double y) const {
    if (!std::isfinite(y)) throw ValidationError("xi_of_y needs a finite y");
    if (y >= ys_.back()) return l_max_ + (y - ys_.back());  // e^{-l} below round-off here
    if (y <= ys_.front()) return left_asymptote(y);
    const auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - ys_.begin()) - 1;
    const double y0 = ys_[i], y1 = ys_[i + 1];
    const double l0 = node_l(i), l1 = node_l(i + 1);
    const double s0 = slope(l0), s1 = slope(l1);  // dl/dy
    const double hy = y1 - y0;
    const double th = (y - y0) / hy;
    const double h00 = (1 + 2 * th) * (1 - th) * (1 - th), h10 = th * (1 - th) * (1 - th);
    const double h01 = th * th * (3 - 2 * th), h11 = th * th * (th - 1);
    double l = h00 * l0 + h10 * hy * s0 + h01 * l1 + h11 * hy * s1;
    l = std::clamp(l, l0, l1);
    for (int it2 = 0; it2 < 3; ++it2) {
      const double r = y0 + segment_integral(l0, l) - y;
      const double dl = r * slope(l);
      l = std::clamp(l - dl, l0, l1);
      if (std::abs(dl) <= 1e-16 * std::max(1.0, std::abs(l))) break;
    }
    return l;
  }

  /// y at a given logit, from the table plus one local panel.
  double y_of_logit(double l) const {
    if (l >= l_max_) return ys_.back() + (l - l_max_);
    if (l <= l_min_) {
      // (1 + e^{-s})^nu = e^{-nu s}(1 + e^s)^nu; e^s is negligible this far left
      return ys_.front() - (std::exp(-nu_ * l) - std::exp(-nu_ * l_min_)) / nu_;
    }
    const std::size_t i = std::min(static_cast<std::size_t>((l - l_min_) / dl_), ys_.size() - 2);
    return ys_[i] + segment_integral(node_l(i), l);
  }

  /// y(xi) by quadrature with the endpoint singularities integrated in closed form.
  double y_of_xi(double xi) const {
    if (!(xi > 0.0 && xi < 1.0)) throw ValidationError("y_of_xi needs 0 < xi < 1");
    return singular_part(xi) - singular_part(0.5) + regular_part(0.5, xi);
  }

  ProfileEval eval_logit(double l) const {
    ProfileEval e{};
    // xi = 1/(1+e^{-l}); ln xi = -log1p(e^{-l})
    if (l >= 0) {
      const double em = std::exp(-l);
      e.xi = 1.0 / (1.0 + em);
      e.one_minus_xi = em / (1.0 + em);
      e.log_xi = -std::log1p(em);
    } else {
      const double ep = std::exp(l);
      e.xi = ep / (1.0 + ep);
      e.one_minus_xi = 1.0 / (1.0 + ep);
      e.log_xi = l - std::log1p(ep);
    }
    e.k0_scaled = std::exp(nu_ * e.log_xi) * e.one_minus_xi;
    e.xi_dot = e.k0_scaled * e.xi;
    return e;
  }

  /// Lowest / highest tabulated y.
  double y_table_min() const { return ys_.front(); }
  double y_table_max() const { return ys_.back(); }

 private:
  double node_l(std::size_t i) const { return l_min_ + dl_ * static_cast<double>(i); }

  // dl/dy = xi^nu
  double slope(double l) const { return std::exp(-nu_ * std::log1p(std::exp(-l))); }

  double integrand(double s) const { return std::exp(nu_ * std::log1p(std::exp(-s))); }

  double segment_integral(double a, double b) const {
    return quad::fixed([this](double s) { return integrand(s); }, rule_, a, b);
  }

  double left_asymptote(double y) const {
    // y ~ ys_.front() - (e^{-nu l} - e^{-nu l_min}) / nu beyond the table
    const double arg = nu_ * (ys_.front() - y) + std::exp(-nu_ * l_min_);
    return -std::log(arg) / nu_;
  }

  void build_table() {
    // Left end far enough that y reaches ~ -1e250; right end where e^{-l} is below round-off.
    l_min_ = -std::min(575.0 / nu_, 400.0);
    l_max_ = 40.0;
    dl_ = 1.0 / 16.0;
    rule_ = quad::gauss_legendre<20>();
    const auto n = static_cast<std::size_t>(std::ceil((l_max_ - l_min_) / dl_)) + 1;
    l_max_ = l_min_ + dl_ * static_cast<double>(n - 1);
    ys_.assign(n, 0.0);
    // anchor y(l = 0) = 0 at the node nearest to zero, then accumulate both ways
    const auto i0 = static_cast<std::size_t>(std::llround(-l_min_ / dl_));
    ys_[i0] = segment_integral(0.0, node_l(i0));
    for (std::size_t i = i0 + 1; i < n; ++i) ys_[i] = ys_[i - 1] + segment_integral(node_l(i - 1), node_l(i));
    for (std::size_t i = i0; i-- > 0;) ys_[i] = ys_[i + 1] - segment_integral(node_l(i), node_l(i + 1));
  }

  // Closed-form antiderivative of sum_{p<=[nu]} eta^{p-nu-1} + 1/(1-eta).
  double singular_part(double xi) const {
    const int n = static_cast<int>(std::floor(nu_));
    double s = -std::log1p(-xi);
    for (int p = 0; p <= n; ++p) {
      const double e = p - nu_;
      s += (std::abs(e) < 1e-14) ? std::log(xi) : std::pow(xi, e) / e;
    }
    return s;
  }

  // Integral of (eta^{[nu]-nu} - 1)/(1 - eta) in the variable ln(eta), smooth on [0,1].
  double regular_part(double a, double b) const {
    const double e = std::floor(nu_) - nu_;
    if (std::abs(e) < 1e-14) return 0.0;
    auto f = [e](double s) { return std::expm1(e * s) * std::exp(s) / -std::expm1(s); };
    return quad::gauss_kronrod(f, std::log(a), std::log(b), {1e-12, 12}).value;
  }

  double nu_;
  double l_min_ = 0, l_max_ = 0, dl_ = 0;
  quad::Rule rule_;
  std::vector<double> ys_;
};

/// Free-function form of the profile lookups.
inline ProfileEval xi_of_y(const Profile& prof, double y) { return prof.at(y); }
inline double y_of_xi(const Profile& prof, double xi) { return prof.y_of_xi(xi); }

}  // namespace rtevans
