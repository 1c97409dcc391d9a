#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_linalg.h>
#include <gsl/gsl_vector.h>

#include "rtevans/error.hpp"
#include "rtevans/params.hpp"
#include "rtevans/profile.hpp"

namespace rtevans {

namespace detail {

// Solves (d, e) x = rhs for a symmetric tridiagonal system, diag d and off-diagonal e.
inline std::vector<double> solve_symm_tridiag(const std::vector<double>& d, const std::vector<double>& e,
                                              const std::vector<double>& rhs) {
  const std::size_t n = d.size();
  std::vector<double> dd(d), ee(e), bb(rhs), x(n);
  auto view = [](std::vector<double>& v) { return gsl_vector_view_array(v.data(), v.size()); };
  auto vd = view(dd), vb = view(bb), vx = view(x);
  if (n == 1) {
    x[0] = rhs[0] / d[0];
    return x;
  }
  auto ve = view(ee);
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  const int status = gsl_linalg_solve_symm_tridiag(&vd.vector, &ve.vector, &vb.vector, &vx.vector);
  gsl_set_error_handler(old);
  if (status != GSL_SUCCESS) throw NumericalError(std::string("tridiagonal solve failed: ") + gsl_strerror(status));
  return x;
}

}  // namespace detail

/// Node set for the flat-measure operator, in physical x = L0 y.
/// Spacing grows away from the k0 maximum and is capped by a fraction of the decay length 1/k.
struct XGrid {
  double L0 = 1;
  double x_min = 0, x_max = 0;       // Dirichlet ends
  std::vector<double> x;             // interior nodes
  std::vector<double> h;             // h[i] = x[i] - x[i-1], with x[-1] = x_min; size n + 1
  std::vector<double> k0, W0, rho;   // physical k0, W0 = k0'/2 + k0^2/4, rho0/rho_a = xi
  std::size_t n() const { return x.size(); }
  double mass(std::size_t i) const { return 0.5 * (h[i] + h[i + 1]); }
};

struct GridOptions {
  double resolution = 1;    // multiplies node density
  double width_scale = 1;   // multiplies the decay margins
  double decay_lengths = 30;
};

/// Grid for wavenumber k; margins of decay_lengths/k on both sides of the k0 maximum.
inline XGrid make_xgrid(const Profile& prof, const PhysicalParams& p, double k, const GridOptions& opt = {}) {
  p.validate();
  detail::require(k > 0 && opt.resolution > 0 && opt.width_scale > 0, "grid needs k > 0 and positive scales");
  const double nu = p.nu, eps = k * p.L0;
  const double y_star = prof.y_of_xi(nu / (nu + 1));
  const double left = y_star - opt.width_scale * (opt.decay_lengths / eps + 10);
  const double right = y_star + opt.width_scale * (opt.decay_lengths / eps + 30);
  // local scale: O(1) profile structure and eps^{-1/2} semiclassical width near the peak
  const double h0 = 0.04 * std::min(1.0, 1 / std::sqrt(eps)) / opt.resolution;
  const double h_far = std::min(0.5, 0.08 / eps) / opt.resolution;
  auto spacing = [&](double y) { return std::min(h0 * (1 + std::abs(y - y_star) / 4), std::max(h0, h_far)); };

  std::vector<double> ys;
  for (double y = y_star; y > left; y -= spacing(y)) ys.push_back(y);
  std::reverse(ys.begin(), ys.end());
  for (double y = y_star + spacing(y_star); y < right; y += spacing(y)) ys.push_back(y);
  const double y_lo = left, y_hi = right;
  // drop nodes too close to the ends
  while (!ys.empty() && ys.front() - y_lo < 0.25 * spacing(ys.front())) ys.erase(ys.begin());
  while (!ys.empty() && y_hi - ys.back() < 0.25 * spacing(ys.back())) ys.pop_back();

  XGrid g;
  g.L0 = p.L0;
  g.x_min = p.L0 * y_lo;
  g.x_max = p.L0 * y_hi;
  double prev = g.x_min;
  for (double y : ys) {
    const auto e = prof.at(y);
    const double x = p.L0 * y;
    g.x.push_back(x);
    g.h.push_back(x - prev);
    prev = x;
    const double xin = std::exp(nu * e.log_xi);
    const double dk0 = xin * xin * e.one_minus_xi * (nu - (nu + 1) * e.xi) / (p.L0 * p.L0);
    const double k0 = e.k0_scaled / p.L0;
    g.k0.push_back(k0);
    g.W0.push_back(0.5 * dk0 + 0.25 * k0 * k0);
    g.rho.push_back(e.xi);
  }
  g.h.push_back(g.x_max - prev);

  // the bound state decays like exp(-k |x - x*|); the right end must also be past the k0 layer
  const double k0_peak = *std::max_element(g.k0.begin(), g.k0.end());
  const double decay = std::exp(-k * std::min(p.L0 * y_star - g.x_min, g.x_max - p.L0 * y_star));
  if (decay > 1e-12 || g.k0.back() > 1e-8 * k0_peak) throw ValidationError("spectral grid too narrow");
  return g;
}

/// Symmetric tridiagonal H = -(1/k^2) M^{-1/2} D2 M^{-1/2} + 1 - (g/gamma^2) k0 + W0/k^2.
struct Tridiag {
  std::vector<double> diag, off;
};

inline Tridiag build_operator(const XGrid& grid, double k, double gamma, const PhysicalParams& p) {
  detail::require(k > 0 && gamma > 0, "operator needs k > 0 and gamma > 0");
  const std::size_t n = grid.n();
  detail::require(n >= 3, "grid needs at least three nodes");
  Tridiag t;
  t.diag.resize(n);
  t.off.resize(n - 1);
  const double ik2 = 1 / (k * k), beta = p.g / (gamma * gamma);
  for (std::size_t i = 0; i < n; ++i) {
    t.diag[i] = ik2 * (1 / grid.h[i] + 1 / grid.h[i + 1]) / grid.mass(i) + 1 - beta * grid.k0[i] + ik2 * grid.W0[i];
    if (i + 1 < n) t.off[i] = -ik2 / (grid.h[i + 1] * std::sqrt(grid.mass(i) * grid.mass(i + 1)));
  }
  return t;
}

/// Number of eigenvalues below sigma (Sturm sequence).
inline std::size_t sturm_count(const Tridiag& t, double sigma) {
  std::size_t count = 0;
  double q = 1;
  for (std::size_t i = 0; i < t.diag.size(); ++i) {
    const double e2 = i ? t.off[i - 1] * t.off[i - 1] : 0.0;
    q = t.diag[i] - sigma - (i ? e2 / q : 0.0);
    if (q == 0) q = -1e-300;
    if (q < 0) ++count;
  }
  return count;
}

/// Smallest eigenvalue by Sturm bisection within Gershgorin bounds.
inline double min_eigenvalue(const Tridiag& t, double rtol = 1e-15) {
  double lo = t.diag[0], hi = t.diag[0];
  for (std::size_t i = 0; i < t.diag.size(); ++i) {
    const double r = (i ? std::abs(t.off[i - 1]) : 0.0) + (i + 1 < t.diag.size() ? std::abs(t.off[i]) : 0.0);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  while (hi - lo > rtol * scale) {
    const double mid = 0.5 * (lo + hi);
    (sturm_count(t, mid) >= 1 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

struct SpectralOptions {
  double resolution = 1;
  double width_scale = 1;
  double convergence_tol = 1e-4;  // relative change of gamma under grid doubling
  int max_refinements = 5;
};

struct SpectralResult {
  double k = 0;
  double gamma = 0;
  double eigenvalue_residual = 0;  // |H v - mu v| / |v| at the root, plus |mu|
  double min_eigenvalue = 0;
  double grid_change = 0;          // relative change from the previous refinement
  int refinements = 0;
  std::vector<double> x;           // physical nodes
  std::vector<double> eigenmode;   // u, L2-normalized in x, positive at x = 0
  std::shared_ptr<const XGrid> grid;
};

namespace detail {

inline SpectralResult gamma_on_grid(double k, const PhysicalParams& p, std::shared_ptr<const XGrid> grid) {
  const double cap = l_eff_and_cap(p).Lambda;
  double lo = 0.5 * cap, hi = cap * (1 - 1e-12);
  auto negative = [&](double gam) { return sturm_count(build_operator(*grid, k, gam, p), 0.0) >= 1; };
  if (!negative(lo)) {
    std::ostringstream os;
    os << "no eigenvalue crossing in (Lambda/2, Lambda) at k = " << k << ": k is below the spectral range";
    throw NumericalError(os.str());
  }
  if (negative(hi)) throw NumericalError("minimum eigenvalue still negative at gamma = Lambda");
  while (hi - lo > 1e-14 * cap) {
    const double mid = 0.5 * (lo + hi);
    (negative(mid) ? lo : hi) = mid;
  }
  SpectralResult r;
  r.k = k;
  r.gamma = 0.5 * (lo + hi);
  const auto op = build_operator(*grid, k, r.gamma, p);
  r.min_eigenvalue = min_eigenvalue(op);

  // inverse iteration with a shift just below the minimum
  const std::size_t n = grid->n();
  const double shift = r.min_eigenvalue - 1e-6 * std::max(1.0, std::abs(r.min_eigenvalue));
  std::vector<double> d(op.diag);
  for (double& v : d) v -= shift;
  std::vector<double> v(n, 1.0);
  for (int it = 0; it < 8; ++it) {
    v = solve_symm_tridiag(d, op.off, v);
    double norm = 0;
    for (double c : v) norm += c * c;
    norm = std::sqrt(norm);
    for (double& c : v) c /= norm;
  }
  double res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double hv = op.diag[i] * v[i];
    if (i) hv += op.off[i - 1] * v[i - 1];
    if (i + 1 < n) hv += op.off[i] * v[i + 1];
    res += std::pow(hv - r.min_eigenvalue * v[i], 2);
  }
  r.eigenvalue_residual = std::sqrt(res) + std::abs(r.min_eigenvalue);

  // u = M^{-1/2} v, normalized with the x measure, u(0) > 0
  r.x = grid->x;
  r.eigenmode.resize(n);
  double norm2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    r.eigenmode[i] = v[i] / std::sqrt(grid->mass(i));
    norm2 += grid->mass(i) * r.eigenmode[i] * r.eigenmode[i];
  }
  const auto at0 = std::lower_bound(r.x.begin(), r.x.end(), 0.0) - r.x.begin();
  const double sign = r.eigenmode[std::min<std::size_t>(at0, n - 1)] < 0 ? -1.0 : 1.0;
  for (double& u : r.eigenmode) u *= sign / std::sqrt(norm2);
  r.grid = std::move(grid);
  return r;
}

}  // namespace detail

/// gamma(k) with zero minimum eigenvalue, refining the grid until gamma settles.
inline SpectralResult gamma_spectral(double k, const PhysicalParams& p, const SpectralOptions& opt = {}) {
  p.validate();
  detail::require(k > 0 && std::isfinite(k), "gamma_spectral needs k > 0");
  const Profile prof(p.nu);
  GridOptions go{opt.resolution, opt.width_scale};
  auto prev = detail::gamma_on_grid(k, p, std::make_shared<const XGrid>(make_xgrid(prof, p, k, go)));
  for (int r = 1; r <= opt.max_refinements; ++r) {
    go.resolution *= 2;
    auto next = detail::gamma_on_grid(k, p, std::make_shared<const XGrid>(make_xgrid(prof, p, k, go)));
    next.grid_change = std::abs(next.gamma - prev.gamma) / next.gamma;
    next.refinements = r;
    if (next.grid_change < opt.convergence_tol) return next;
    prev = std::move(next);
  }
  std::ostringstream os;
  os << "spectral gamma not grid-converged at k = " << k << " (last change " << prev.grid_change << ")";
  throw NumericalError(os.str());
}

/// gamma on one given grid, without refinement.
inline SpectralResult gamma_spectral(double k, const PhysicalParams& p, const XGrid& grid) {
  p.validate();
  return detail::gamma_on_grid(k, p, std::make_shared<const XGrid>(grid));
}

struct EigenmodeNorms {
  double u, du, d2u, rho_u, rho_du;  // discrete L2 norms in x
  double ode_residual;               // max |second difference - u'' from the Rayleigh equation|, scaled
};

/// Norms of the eigenmode and its derivatives; u'' from -u'' - k0 u' + k^2 u - (g k^2/gamma^2) k0 u = 0.
inline EigenmodeNorms eigenmode_diagnostics(const SpectralResult& r, const PhysicalParams& p) {
  detail::require(r.grid && r.eigenmode.size() == r.grid->n(), "diagnostics need a solved result");
  const auto& g = *r.grid;
  const auto& u = r.eigenmode;
  const std::size_t n = g.n();
  EigenmodeNorms nm{};
  for (std::size_t i = 0; i < n; ++i) {
    const double ul = i ? u[i - 1] : 0.0, ur = i + 1 < n ? u[i + 1] : 0.0;
    const double hl = g.h[i], hr = g.h[i + 1], m = g.mass(i);
    const double du = (ur - ul) / (hl + hr);
    const double d2 = ((ur - u[i]) / hr - (u[i] - ul) / hl) / m;
    nm.u += m * u[i] * u[i];
    nm.du += m * du * du;
    nm.d2u += m * d2 * d2;
    nm.rho_u += m * g.rho[i] * u[i] * u[i];
    nm.rho_du += m * g.rho[i] * du * du;
  }
  // the flat-measure mode is rho^{1/2} u_rayleigh; check the Rayleigh form on w = u / sqrt(rho)
  // where rho is not tiny
  double res = 0, ref = 0;
  const double k = r.k, beta = p.g * k * k / (r.gamma * r.gamma);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (g.rho[i - 1] < 1e-3) continue;
    auto w = [&](std::size_t j) { return u[j] / std::sqrt(g.rho[j]); };
    const double hl = g.h[i], hr = g.h[i + 1], m = g.mass(i);
    const double dw = (w(i + 1) - w(i - 1)) / (hl + hr);
    const double d2w = ((w(i + 1) - w(i)) / hr - (w(i) - w(i - 1)) / hl) / m;
    const double ode = -g.k0[i] * dw + k * k * w(i) - beta * g.k0[i] * w(i);
    res = std::max(res, std::abs(d2w - ode));
    ref = std::max(ref, std::abs(d2w));
  }
  nm.u = std::sqrt(nm.u);
  nm.du = std::sqrt(nm.du);
  nm.d2u = std::sqrt(nm.d2u);
  nm.rho_u = std::sqrt(nm.rho_u);
  nm.rho_du = std::sqrt(nm.rho_du);
  nm.ode_residual = ref > 0 ? res / ref : 0.0;
  return nm;
}

}  // namespace rtevans
