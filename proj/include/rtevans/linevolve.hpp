#pragma once

#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include "rtevans/error.hpp"
#include "rtevans/params.hpp"
#include "rtevans/spectral.hpp"

namespace rtevans {

using cplx = std::complex<double>;
using Field = std::vector<cplx>;

/// One Fourier mode of the weighted density perturbation tau and the auxiliary vorticity b.
struct EvolveState {
  double t = 0;
  Field tau_hat;
  Field b_hat;
  double k = 0;
};

struct GrowthFit {
  double gamma_measured = 0;
  double t_a = 0, t_b = 0;
  double r_squared = 0;
};

struct TrajectoryPoint {
  double t, tau_norm, b_norm, log_derivative;
};

namespace detail {

inline std::vector<double> solve_tridiag(const std::vector<double>& diag, const std::vector<double>& upper,
                                         const std::vector<double>& lower, const std::vector<double>& rhs) {
  std::vector<double> d(diag), e(upper), f(lower), b(rhs), x(diag.size());
  auto view = [](std::vector<double>& v) { return gsl_vector_view_array(v.data(), v.size()); };
  auto vd = view(d), ve = view(e), vf = view(f), vb = view(b), vx = view(x);
  gsl_error_handler_t* old = gsl_set_error_handler_off();
  const int status = gsl_linalg_solve_tridiag(&vd.vector, &ve.vector, &vf.vector, &vb.vector, &vx.vector);
  gsl_set_error_handler(old);
  if (status != GSL_SUCCESS) throw NumericalError(std::string("tridiagonal solve failed: ") + gsl_strerror(status));
  return x;
}

}  // namespace detail

/// Per-mode linearized evolution on an XGrid:
///   d tau/dt = i k k0 psi,   d b/dt = -i k g tau,   (d^2/dx^2 - k^2 - W0) psi = -b.
class LinearEvolver {
 public:
  LinearEvolver(XGrid grid, double k, const PhysicalParams& p) : grid_(std::move(grid)), k_(k), p_(p) {
    p.validate();
    detail::require(k > 0, "evolver needs k > 0");
    const std::size_t n = grid_.n();
    detail::require(n >= 3, "evolver grid needs at least three nodes");
    // (S + M (k^2 + W0)) psi = M b, S the stiffness form of -d^2/dx^2
    diag_.resize(n);
    off_.resize(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double m = grid_.mass(i);
      diag_[i] = 1 / grid_.h[i] + 1 / grid_.h[i + 1] + m * (k * k + grid_.W0[i]);
      if (!(diag_[i] > 0)) throw NumericalError("elliptic operator not positive at assembly");
      if (i + 1 < n) off_[i] = -1 / grid_.h[i + 1];
    }
  }

  const XGrid& grid() const { return grid_; }
  double k() const { return k_; }

  /// Solves (d^2/dx^2 - k^2 - W0) psi = -b.
  Field elliptic_solve_psi(const Field& b) const {
    const std::size_t n = grid_.n();
    detail::require(b.size() == n, "field size does not match the grid");
    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = grid_.mass(i) * b[i].real();
      im[i] = grid_.mass(i) * b[i].imag();
    }
    const auto xr = detail::solve_symm_tridiag(diag_, off_, re);
    const auto xi = detail::solve_symm_tridiag(diag_, off_, im);
    Field psi(n);
    for (std::size_t i = 0; i < n; ++i) psi[i] = {xr[i], xi[i]};
    return psi;
  }

  /// Applies (d^2/dx^2 - k^2 - W0) with the same stencil, Dirichlet ends.
  Field apply_elliptic(const Field& psi) const {
    const std::size_t n = grid_.n();
    Field out(n);
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = diag_[i] * psi[i];
      if (i) s += off_[i - 1] * psi[i - 1];
      if (i + 1 < n) s += off_[i] * psi[i + 1];
      out[i] = -s / grid_.mass(i);
    }
    return out;
  }

  /// Packed right-hand side on [tau; b].
  void rhs(const Field& y, Field& dy) const {
    const std::size_t n = grid_.n();
    const Field b(y.begin() + n, y.end());
    const Field psi = elliptic_solve_psi(b);
    dy.resize(2 * n);
    const cplx ik(0, k_);
    for (std::size_t i = 0; i < n; ++i) {
      dy[i] = ik * grid_.k0[i] * psi[i];
      dy[n + i] = -ik * p_.g * y[i];
    }
  }

  /// One classical RK4 step.
  EvolveState step(const EvolveState& s, double dt) const {
    const double cap = l_eff_and_cap(p_).Lambda;
    detail::require(std::abs(dt) <= 0.1 / cap * (1 + 1e-12), "dt exceeds the stability bound 0.1/Lambda");
    Field y = pack(s);
    stepper_.do_step([this](const Field& x, Field& dx, double) { rhs(x, dx); }, y, s.t, dt);
    return unpack(y, s.t + dt);
  }

  double norm(const Field& f) const {
    double acc = 0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += grid_.mass(i) * std::norm(f[i]);
    return std::sqrt(acc);
  }

  /// Runs to t_end with dt, recording norms every `every` steps.
  std::vector<TrajectoryPoint> run(EvolveState& s, double t_end, double dt, int every = 1) const {
    detail::require(dt > 0 && t_end >= s.t && every >= 1, "run needs dt > 0 and t_end >= t");
    std::vector<TrajectoryPoint> traj;
    auto record = [&] {
      const double nt = norm(s.tau_hat);
      double logd = 0;
      if (!traj.empty() && nt > 0 && traj.back().tau_norm > 0)
        logd = std::log(nt / traj.back().tau_norm) / (s.t - traj.back().t);
      traj.push_back({s.t, nt, norm(s.b_hat), logd});
    };
    record();
    const auto steps = static_cast<long>(std::ceil((t_end - s.t) / dt - 1e-9));
    const double h = steps ? (t_end - s.t) / static_cast<double>(steps) : 0.0;
    for (long i = 1; i <= steps; ++i) {
      s = step(s, h);
      if (i % every == 0 || i == steps) record();
    }
    return traj;
  }

  /// Pressure per mode from (d^2/dx^2 - k^2 - k0 d/dx) p = rho^{1/2} g (d tau/dx - k0 tau/2), f = 0.
  Field pressure_diagnostic(const EvolveState& s) const {
    const std::size_t n = grid_.n();
    std::vector<double> d(n), up(n - 1), lo(n - 1), rr(n), ri(n);
    const auto& h = grid_.h;
    for (std::size_t i = 0; i < n; ++i) {
      const double hl = h[i], hr = h[i + 1], m = grid_.mass(i);
      // second difference and centered first difference on the nonuniform grid
      const double cl = 1 / (hl * m), cr = 1 / (hr * m), c1 = 1 / (hl + hr);
      d[i] = -(cl + cr) - k_ * k_;
      if (i + 1 < n) up[i] = cr - grid_.k0[i] * c1;
      if (i) lo[i - 1] = cl + grid_.k0[i] * c1;
      const cplx tl = i ? s.tau_hat[i - 1] : cplx{}, tr = i + 1 < n ? s.tau_hat[i + 1] : cplx{};
      const cplx src = std::sqrt(p_.rho_a * grid_.rho[i]) * p_.g * ((tr - tl) * c1 - 0.5 * grid_.k0[i] * s.tau_hat[i]);
      rr[i] = src.real();
      ri[i] = src.imag();
    }
    const auto pr = detail::solve_tridiag(d, up, lo, rr);
    const auto pi = detail::solve_tridiag(d, up, lo, ri);
    Field out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = {pr[i], pi[i]};
    return out;
  }

 private:
  Field pack(const EvolveState& s) const {
    detail::require(s.tau_hat.size() == grid_.n() && s.b_hat.size() == grid_.n(), "state size does not match the grid");
    Field y(s.tau_hat);
    y.insert(y.end(), s.b_hat.begin(), s.b_hat.end());
    return y;
  }
  EvolveState unpack(const Field& y, double t) const {
    const std::size_t n = grid_.n();
    EvolveState s{t, Field(y.begin(), y.begin() + n), Field(y.begin() + n, y.end()), k_};
    for (const auto& c : y)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw NumericalError("evolution produced non-finite fields");
    return s;
  }

  XGrid grid_;
  double k_;
  PhysicalParams p_;
  std::vector<double> diag_, off_;
  mutable boost::numeric::odeint::runge_kutta4<Field> stepper_;
};

/// State from a spectral eigenmode u: tau = k0 u, b = -i (g k/gamma) k0 u.
inline EvolveState eigen_initial_state(const SpectralResult& r, const PhysicalParams& p) {
  detail::require(r.grid != nullptr, "eigen initialization needs a solved spectral result");
  const std::size_t n = r.grid->n();
  EvolveState s{0, Field(n), Field(n), r.k};
  for (std::size_t i = 0; i < n; ++i) {
    const double tk = r.grid->k0[i] * r.eigenmode[i];
    s.tau_hat[i] = tk;
    s.b_hat[i] = cplx(0, -p.g * r.k / r.gamma) * tk;
  }
  return s;
}

/// Smooth random state: a few Gaussian bumps in the k0 layer with random complex amplitudes.
inline EvolveState random_initial_state(const XGrid& grid, double k, std::uint64_t seed, int bumps = 4) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> amp(0.0, 1.0);
  const auto peak = std::max_element(grid.k0.begin(), grid.k0.end()) - grid.k0.begin();
  const double x_star = grid.x[peak];
  std::uniform_real_distribution<double> centre(x_star - 3 * grid.L0, x_star + 3 * grid.L0);
  std::uniform_real_distribution<double> width(0.5 * grid.L0, 2 * grid.L0);
  EvolveState s{0, Field(grid.n()), Field(grid.n()), k};
  for (int j = 0; j < bumps; ++j) {
    const double c = centre(rng), w = width(rng);
    const cplx at(amp(rng), amp(rng)), ab(amp(rng), amp(rng));
    for (std::size_t i = 0; i < grid.n(); ++i) {
      const double e = std::exp(-0.5 * std::pow((grid.x[i] - c) / w, 2));
      s.tau_hat[i] += at * e;
      s.b_hat[i] += ab * e;
    }
  }
  return s;
}

/// Least-squares slope of log ||tau|| over the last half of the trajectory.
inline GrowthFit measure_growth(const std::vector<TrajectoryPoint>& traj, double min_r_squared = 0.999) {
  detail::require(traj.size() >= 4, "growth fit needs at least four samples");
  const std::size_t first = traj.size() / 2;
  std::vector<double> ts, ls;
  for (std::size_t i = first; i < traj.size(); ++i) {
    if (!(traj[i].tau_norm > 0) || !std::isfinite(traj[i].tau_norm)) throw NumericalError("degenerate trajectory: zero or non-finite norm");
    ts.push_back(traj[i].t);
    ls.push_back(std::log(traj[i].tau_norm));
  }
  const double n = static_cast<double>(ts.size());
  const double mt = std::accumulate(ts.begin(), ts.end(), 0.0) / n;
  const double ml = std::accumulate(ls.begin(), ls.end(), 0.0) / n;
  double stt = 0, stl = 0, sll = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    stl += (ts[i] - mt) * (ls[i] - ml);
    sll += (ls[i] - ml) * (ls[i] - ml);
  }
  GrowthFit fit;
  fit.gamma_measured = stl / stt;
  fit.t_a = ts.front();
  fit.t_b = ts.back();
  fit.r_squared = sll > 0 ? stl * stl / (stt * sll) : 0.0;
  if (fit.r_squared < min_r_squared) throw NumericalError("poor growth fit: r^2 = " + std::to_string(fit.r_squared));
  return fit;
}

}  // namespace rtevans
