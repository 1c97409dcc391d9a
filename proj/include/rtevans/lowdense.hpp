#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "rtevans/error.hpp"
#include "rtevans/profile.hpp"
#include "rtevans/quadrature.hpp"
#include "rtevans/specfun.hpp"

namespace rtevans {

/// Geometric panels of Chebyshev-Lobatto nodes on [t0, t_max] in t = -eps y.
///
/// Each panel carries the two moment matrices the Volterra pass needs:
///   W_ij = int_{x_i}^{b} e^{-2(s - x_i)} l_j(s) ds,   Q_ij = int_{x_i}^{b} l_j(s) ds,
/// so one right-to-left sweep applies the operator in O(n p).
class TGrid {
 public:
  static constexpr int kPerPanel = 20;

  explicit TGrid(double t0 = 0.05, double t_max = 1e12, double ratio = 2.0) : t0_(t0), t_max_(t_max) {
    detail::require(t0 > 0 && t_max > 2 * t0 && ratio > 1.05, "TGrid needs 0 < t0 < t_max and ratio > 1");
    cheb_nodes();
    breaks_.push_back(t0);
    while (breaks_.back() < t_max) breaks_.push_back(std::min(breaks_.back() * ratio, t_max));
    for (std::size_t k = 0; k + 1 < breaks_.size(); ++k) build_panel(breaks_[k], breaks_[k + 1]);
  }

  double t0() const { return t0_; }
  double t_max() const { return t_max_; }
  std::size_t panels() const { return breaks_.size() - 1; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  double panel_left(std::size_t k) const { return breaks_[k]; }
  double panel_right(std::size_t k) const { return breaks_[k + 1]; }
  const double* W(std::size_t k) const { return &w_[k * kPerPanel * kPerPanel]; }
  const double* Q(std::size_t k) const { return &q_[k * kPerPanel * kPerPanel]; }

  /// Barycentric interpolation of node values at t in [t0, t_max].
  double interpolate(const std::vector<double>& vals, double t) const {
    detail::require(vals.size() == nodes_.size(), "interpolate: value count mismatch");
    if (!(t >= t0_ && t <= t_max_)) throw ValidationError("interpolate: t outside the grid");
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - breaks_.begin()), breaks_.size() - 1) - 1;
    const double* x = &nodes_[k * kPerPanel];
    const double* f = &vals[k * kPerPanel];
    double num = 0, den = 0;
    for (int j = 0; j < kPerPanel; ++j) {
      const double d = t - x[j];
      if (d == 0.0) return f[j];
      const double c = bary_[j] / d;
      num += c * f[j];
      den += c;
    }
    return num / den;
  }

 private:
  void cheb_nodes() {
    const int p = kPerPanel;
    for (int j = 0; j < p; ++j) {
      ref_[j] = 0.5 * (1 - std::cos(std::numbers::pi * j / (p - 1)));  // increasing in [0, 1]
      bary_[j] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == p - 1) ? 0.5 : 1.0);
    }
  }

  // all Lagrange basis values at s for a panel with nodes x
  void basis(const double* x, double s, double* out) const {
    double den = 0;
    for (int j = 0; j < kPerPanel; ++j) {
      const double d = s - x[j];
      if (d == 0.0) {
        std::fill(out, out + kPerPanel, 0.0);
        out[j] = 1.0;
        return;
      }
      out[j] = bary_[j] / d;
      den += out[j];
    }
    for (int j = 0; j < kPerPanel; ++j) out[j] /= den;
  }

  void build_panel(double a, double b) {
    const int p = kPerPanel;
    const std::size_t off = nodes_.size();
    for (int j = 0; j < p; ++j) nodes_.push_back(a + (b - a) * ref_[j]);
    nodes_[off + p - 1] = b;
    const double* x = &nodes_[off];
    static const quad::Rule gl = quad::gauss_legendre<20>();
    std::vector<double> wrow(p), qrow(p), lb(p);
    for (int i = 0; i < p; ++i) {
      std::fill(wrow.begin(), wrow.end(), 0.0);
      std::fill(qrow.begin(), qrow.end(), 0.0);
      // Q: degree p-1 polynomial, one rule suffices
      {
        const double c = 0.5 * (x[i] + b), h = 0.5 * (b - x[i]);
        for (std::size_t m = 0; m < gl.nodes.size(); ++m) {
          basis(x, c + h * gl.nodes[m], lb.data());
          for (int j = 0; j < p; ++j) qrow[j] += h * gl.weights[m] * lb[j];
        }
      }
      // W: the weight e^{-2(s - x_i)} is below 1e-17 past x_i + 20
      const double end = std::min(b, x[i] + 20.0);
      const int pieces = std::max(2, static_cast<int>(std::ceil((end - x[i]) / 0.5)));
      for (int piece = 0; piece < pieces; ++piece) {
        const double lo = x[i] + (end - x[i]) * piece / pieces, hi = x[i] + (end - x[i]) * (piece + 1) / pieces;
        const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        for (std::size_t m = 0; m < gl.nodes.size(); ++m) {
          const double s = c + h * gl.nodes[m];
          basis(x, s, lb.data());
          const double wt = h * gl.weights[m] * std::exp(-2 * (s - x[i]));
          for (int j = 0; j < p; ++j) wrow[j] += wt * lb[j];
        }
      }
      w_.insert(w_.end(), wrow.begin(), wrow.end());
      q_.insert(q_.end(), qrow.begin(), qrow.end());
    }
  }

  double t0_, t_max_;
  std::array<double, kPerPanel> ref_{}, bary_{};
  std::vector<double> breaks_, nodes_, w_, q_;
};

/// tau(s, eps) = xi^nu (1 - xi) / eps at y = -s/eps; the eps -> 0 limit is 1/(nu s).
inline double tau_weight(const Profile& prof, double s, double eps) {
  detail::require(s > 0 && eps >= 0, "tau_weight needs s > 0 and eps >= 0");
  if (eps == 0.0) return 1.0 / (prof.nu() * s);
  return prof.at(-s / eps).k0_scaled / eps;
}

/// Profile-dependent weights at the grid nodes for one eps.
///   tau = -d ln xi / dt,  eta = xi (nu/eps)^{1/nu}  (eta = t^{-1/nu} at eps = 0)
struct Kernel {
  double nu = 2;
  double epsilon = 0;
  std::vector<double> tau, log_eta, xi;
};

inline Kernel make_kernel(const Profile& prof, double eps, const TGrid& grid) {
  detail::require(eps >= 0, "kernel needs eps >= 0");
  Kernel k{prof.nu(), eps, {}, {}, {}};
  const double nu = prof.nu();
  for (double t : grid.nodes()) {
    if (eps == 0.0) {
      k.tau.push_back(1.0 / (nu * t));
      k.log_eta.push_back(-std::log(t) / nu);
      k.xi.push_back(0.0);
    } else {
      const auto e = prof.at(-t / eps);
      k.tau.push_back(e.k0_scaled / eps);
      k.log_eta.push_back(e.log_xi + std::log(nu / eps) / nu);
      k.xi.push_back(e.xi);
    }
  }
  return k;
}

namespace detail {

// R(g)(t) = eta^lambda int_t^inf e^{-2(s-t)} tau eta^{-lambda} g ds at the nodes.
inline std::vector<double> r_pass(const std::vector<double>& g, double lambda, const Kernel& ker, const TGrid& grid) {
  const int p = TGrid::kPerPanel;
  const std::size_t n = grid.size();
  std::vector<double> psi(n), rt(n), r(n);
  for (std::size_t i = 0; i < n; ++i) psi[i] = ker.tau[i] * std::exp(-lambda * ker.log_eta[i]) * g[i];
  // far tail: R is quasi-static there, R = tau g / (2 - lambda tau)
  const std::size_t last = n - 1;
  double carry = ker.tau[last] * g[last] / (2 - lambda * ker.tau[last]) * std::exp(-lambda * ker.log_eta[last]);
  for (std::size_t k = grid.panels(); k-- > 0;) {
    const double b = grid.panel_right(k);
    const double* W = grid.W(k);
    const std::size_t off = k * p;
    for (int i = 0; i < p; ++i) {
      double s = 0;
      for (int j = 0; j < p; ++j) s += W[i * p + j] * psi[off + j];
      const double decay = std::exp(-2 * (b - grid.nodes()[off + i]));
      rt[off + i] = s + decay * carry;
    }
    carry = rt[off];
  }
  for (std::size_t i = 0; i < n; ++i) r[i] = std::exp(lambda * ker.log_eta[i]) * rt[i];
  return r;
}

// int_t^inf tau R ds at the nodes, tail closed with tau R ~ g / (2 nu^2 t^2).
inline std::vector<double> tail_integral(const std::vector<double>& tau_r, double tail, const TGrid& grid) {
  const int p = TGrid::kPerPanel;
  std::vector<double> out(grid.size());
  double carry = tail;
  for (std::size_t k = grid.panels(); k-- > 0;) {
    const double* Q = grid.Q(k);
    const std::size_t off = k * p;
    for (int i = 0; i < p; ++i) {
      double s = 0;
      for (int j = 0; j < p; ++j) s += Q[i * p + j] * tau_r[off + j];
      out[off + i] = s + carry;
    }
    carry = out[off];
  }
  return out;
}

}  // namespace detail

/// K(g)(t) = (1 - lambda^2)/4 int_t^inf tau R(g) ds at the nodes.
inline std::vector<double> apply_K(const std::vector<double>& g, double lambda, const Kernel& ker, const TGrid& grid) {
  detail::require(g.size() == grid.size() && ker.tau.size() == grid.size(), "apply_K: size mismatch");
  const double c = (1 - lambda * lambda) / 4;
  if (c == 0.0) return std::vector<double>(g.size(), 0.0);
  const auto r = detail::r_pass(g, lambda, ker, grid);
  std::vector<double> tau_r(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) tau_r[i] = ker.tau[i] * r[i];
  const double T = grid.t_max();
  const auto integral = detail::tail_integral(tau_r, g.back() / (2 * ker.nu * ker.nu * T), grid);
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = c * integral[i];
  return out;
}

struct VolterraOptions {
  double tol = 1e-12;
  int max_iterations = 500;
};

/// Fixed point of g = 1 + K(g), with R(g) for the reconstruction.
struct GSolution {
  double lambda = 1;
  double epsilon = 0;
  std::vector<double> g;
  std::vector<double> r;
  int iterations = 0;
  double contraction_factor = 0;
  double residual = 0;
};

inline GSolution volterra_g(double lambda, const Kernel& ker, const TGrid& grid, const VolterraOptions& opt = {}) {
  GSolution sol{lambda, ker.epsilon, std::vector<double>(grid.size(), 1.0), {}, 0, 0, 0};
  double prev_update = 0;
  int slow = 0;
  for (;;) {
    auto k = apply_K(sol.g, lambda, ker, grid);
    double update = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      const double next = 1.0 + k[i];
      update = std::max(update, std::abs(next - sol.g[i]));
      sol.g[i] = next;
    }
    ++sol.iterations;
    if (prev_update > 0) {
      sol.contraction_factor = update / prev_update;
      slow = sol.contraction_factor > 0.9 ? slow + 1 : 0;
      if (slow >= 5) throw NumericalError("Volterra iteration is not contracting; raise t0 or lower eps");
    }
    if (!std::isfinite(update)) throw NumericalError("Volterra iteration diverged");
    if (update < opt.tol) break;
    if (sol.iterations >= opt.max_iterations) throw NumericalError("Volterra iteration hit the iteration cap");
    prev_update = update;
  }
  const auto k = apply_K(sol.g, lambda, ker, grid);
  for (std::size_t i = 0; i < k.size(); ++i) sol.residual = std::max(sol.residual, std::abs(sol.g[i] - 1 - k[i]));
  sol.r = detail::r_pass(sol.g, lambda, ker, grid);
  return sol;
}

/// Value of the low-density branch at one t, scaled by e^t.
struct MinusPoint {
  double t;
  double eF;  // e^t F
  double eG;  // e^t G
  double eu() const { return eF + eG; }
  double ew(double lambda) const { return (lambda - 1) * eF + (lambda + 1) * eG; }
};

/// Branch bounded as y -> -inf: u = F + G, w = (lambda-1)F + (lambda+1)G, v = xi w.
/// Normalized by g -> 1 as t -> inf. Values are stored scaled by e^t (e^{-t} underflows).
class MinusBranch {
 public:
  MinusBranch(std::shared_ptr<const TGrid> grid, const GSolution& gs, const Kernel& ker)
      : grid_(std::move(grid)), lambda_(gs.lambda), epsilon_(gs.epsilon), xi_(ker.xi), tau_(ker.tau) {
    const std::size_t n = grid_->size();
    eF_.resize(n);
    eG_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      // e^t Phi = eta^{-(lambda+1)/2}
      const double ephi = std::exp(-0.5 * (lambda_ + 1) * ker.log_eta[i]);
      eG_[i] = ephi * gs.g[i];
      eF_[i] = ephi * 0.5 * (lambda_ + 1) * gs.r[i];
    }
  }

  double lambda() const { return lambda_; }
  double epsilon() const { return epsilon_; }
  const TGrid& grid() const { return *grid_; }
  std::size_t size() const { return eF_.size(); }
  MinusPoint sample(std::size_t i) const { return {grid_->nodes()[i], eF_[i], eG_[i]}; }
  double xi(std::size_t i) const { return xi_[i]; }
  double tau(std::size_t i) const { return tau_[i]; }

  MinusPoint at(double t) const { return {t, grid_->interpolate(eF_, t), grid_->interpolate(eG_, t)}; }

 private:
  std::shared_ptr<const TGrid> grid_;
  double lambda_, epsilon_;
  std::vector<double> xi_, tau_, eF_, eG_;
};

inline MinusBranch reconstruct_FG(const GSolution& gs, const Kernel& ker, std::shared_ptr<const TGrid> grid) {
  detail::require(gs.g.size() == grid->size() && gs.r.size() == grid->size(), "reconstruct_FG: unconverged solution");
  return MinusBranch(std::move(grid), gs, ker);
}

/// Closed-form eps = 0 branch from the subdominant Kummer function.
///   U0(t) = 2^{-(lambda+1)/(2 nu)} U(-(1+lambda)/(2 nu), -1/nu, 2t),  u0 = U0 e^{-t},
///   F0 = (1/2) U0' e^{-t},  G0 = (U0 - (1/2) U0') e^{-t}.
struct HypergeomPoint {
  double U0, dU0;
  double eF0, eG0;  // scaled by e^t
};

inline HypergeomPoint hypergeom_F0G0(double lambda, double nu, double t) {
  detail::require(t >= 0 && nu > 1, "hypergeom_F0G0 needs t >= 0 and nu > 1");
  const double a = -(1 + lambda) / (2 * nu), b = -1 / nu;
  const double c = std::pow(2.0, a);
  const double U0 = c * specfun::kummer_u({a, b, 2 * t});
  const double dU0 = 2 * c * specfun::kummer_u_prime({a, b, 2 * t});
  return {U0, dU0, 0.5 * dU0, U0 - 0.5 * dU0};
}

/// C0(lambda) = U(a, -1/nu, 0) = Gamma(1 + 1/nu) / Gamma(1 + (1 - lambda)/(2 nu)).
inline double c0_lambda(double lambda, double nu) {
  return specfun::gamma_fn(1 + 1 / nu) * specfun::rgamma(1 + (1 - lambda) / (2 * nu));
}

}  // namespace rtevans
