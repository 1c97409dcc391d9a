#pragma once

#include <cmath>
#include <exception>
#include <future>
#include <string>
#include <vector>

#include "rtevans/evans.hpp"
#include "rtevans/spectral.hpp"

namespace rtevans {

struct DispersionRow {
  double k = 0;
  double epsilon = 0;
  double lambda_root = NAN;
  double gamma = NAN;
  double gamma_asym = NAN;
  double gamma_cap = NAN;
  bool admissible = false;
  std::string source;  // "evans" or "spectral"
  std::string error;   // empty on success
};

struct DispersionOptions {
  double evans_eps_max = 0.3;  // above this kL0 rows come from the spectral route
  EvansOptions evans{};
  SpectralOptions spectral{};
  unsigned jobs = 1;
};

/// Lower admissibility bound max(1, eps (nu+1)^{nu+1} / nu^nu) on lambda.
inline double lambda_admissible_min(double eps, double nu) {
  return std::max(1.0, eps * std::pow(nu + 1, nu + 1) / std::pow(nu, nu));
}

/// sqrt(g k) / sqrt(1 + 2 (2 eps/nu)^{1/nu} / Gamma(1 + 1/nu)).
inline double gamma_asymptotic(double k, const PhysicalParams& p) {
  return std::sqrt(p.g * k / lambda_asymptotic(k * p.L0, p.nu));
}

inline DispersionRow dispersion_row(double k, const PhysicalParams& p, const DispersionOptions& opt = {}) {
  DispersionRow row;
  row.k = k;
  row.epsilon = k * p.L0;
  try {
    p.validate();
    detail::require(k > 0 && std::isfinite(k), "k must be > 0");
    row.gamma_cap = l_eff_and_cap(p).Lambda;
    row.gamma_asym = gamma_asymptotic(k, p);
    std::string evans_error;
    if (row.epsilon <= opt.evans_eps_max) {
      try {
        const EvansFunction ev(p.nu, row.epsilon, opt.evans);
        row.lambda_root = find_lambda(ev).lambda;
        row.source = "evans";
      } catch (const std::exception& e) {
        evans_error = e.what();
      }
    }
    if (row.source.empty()) {
      try {
        const auto r = gamma_spectral(k, p, opt.spectral);
        row.lambda_root = p.g * k / (r.gamma * r.gamma);
        row.source = "spectral";
      } catch (const std::exception& e) {
        row.error = evans_error.empty() ? e.what() : evans_error + "; " + e.what();
        return row;
      }
    }
    row.gamma = std::sqrt(p.g * k / row.lambda_root);
    row.admissible = row.lambda_root >= lambda_admissible_min(row.epsilon, p.nu) && row.gamma < row.gamma_cap;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

/// One row per k, in input order; rows never throw.
inline std::vector<DispersionRow> dispersion(const PhysicalParams& p, const std::vector<double>& ks,
                                             const DispersionOptions& opt = {}) {
  std::vector<DispersionRow> rows(ks.size());
  const unsigned jobs = std::max(1u, opt.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < ks.size(); ++i) rows[i] = dispersion_row(ks[i], p, opt);
    return rows;
  }
  // static striding keeps each worker's rows independent; results land by index
  std::vector<std::future<void>> workers;
  for (unsigned w = 0; w < jobs; ++w)
    workers.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < ks.size(); i += jobs) rows[i] = dispersion_row(ks[i], p, opt);
    }));
  for (auto& f : workers) f.get();
  return rows;
}

}  // namespace rtevans
