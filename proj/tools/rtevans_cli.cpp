// rtevans command-line front end.
//
//   rtevans profile         --nu 2 --points 200
//   rtevans evans-scan      --eps 1e-4 --lambda-min 0.9 --lambda-max 1.3
//   rtevans dispersion      --k 0.01,0.1,1,10
//   rtevans expansion-check --eps-min 1e-6 --eps-max 1e-3 --eps-points 8
//   rtevans spectral        --k 5,10,25
//   rtevans evolve          --k 5 --init eigen
//
// Every subcommand takes --config FILE (JSON, keys are option names with '_' for '-'),
// --format csv|json, --output FILE and --jobs N. Flags win over the config file.
// Relative output paths land under $RTEVANS_OUTPUT_DIR when it is set.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "output.hpp"
#include "rtevans/rtevans.hpp"

namespace {

using rtcli::Cell;
using rtcli::json;
using rtcli::Table;

enum Exit { kOk = 0, kValidation = 2, kNumerical = 3, kIo = 4 };

// Options that can also come from the config file. Resolution happens after parsing.
class Settings {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& name, T& var, const std::string& desc) {
    std::string flag = name;
    std::replace(flag.begin(), flag.end(), '_', '-');
    auto* opt = app->add_option("--" + flag, var, desc);
    if constexpr (std::is_same_v<T, std::vector<double>>) opt->delimiter(',');
    entries_.push_back({app, opt, name, [&var](const json& j) { var = j.get<T>(); }, [&var] { return json(var); }});
    return opt;
  }

  void resolve(const CLI::App* app, const json& file) {
    for (auto& e : entries_) {
      if (e.app != app) continue;
      if (e.opt->count() == 0 && file.contains(e.name)) {
        try {
          e.set(file.at(e.name));
        } catch (const json::exception& ex) {
          throw rtevans::ValidationError("config key '" + e.name + "': " + ex.what());
        }
      }
    }
    for (const auto& [key, val] : file.items()) {
      bool known = false;
      for (auto& e : entries_) known |= e.app == app && e.name == key;
      if (!known) throw rtevans::ValidationError("unknown config key '" + key + "'");
    }
  }

  json resolved(const CLI::App* app) const {
    json out = json::object();
    for (const auto& e : entries_)
      if (e.app == app) out[e.name] = e.get();
    return out;
  }

 private:
  struct Entry {
    const CLI::App* app;
    CLI::Option* opt;
    std::string name;
    std::function<void(const json&)> set;
    std::function<json()> get;
  };
  std::vector<Entry> entries_;
};

struct Common {
  rtevans::PhysicalParams params;
  std::string format = "csv";
  std::string output;
  std::string config;
  unsigned jobs = 1;
  unsigned long long seed = 1;
};

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream f(path);
  if (!f) throw rtcli::IoError("cannot read config file " + path);
  try {
    auto j = json::parse(f);
    if (!j.is_object()) throw rtevans::ValidationError("config file must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw rtevans::ValidationError(std::string("config file is not valid JSON: ") + e.what());
  }
}

std::string output_path(const std::string& out) {
  if (out.empty() || out == "-") return out;
  const std::filesystem::path p(out);
  if (const char* dir = std::getenv("RTEVANS_OUTPUT_DIR"); dir && *dir && p.is_relative())
    return (std::filesystem::path(dir) / p).string();
  return out;
}

// Maps f over indices with `jobs` workers, results in input order.
template <class R>
std::vector<R> ordered_map(std::size_t n, unsigned jobs, const std::function<R(std::size_t)>& f) {
  std::vector<R> out(n);
  const unsigned w = std::max(1u, jobs);
  std::vector<std::future<void>> fs;
  for (unsigned t = 0; t < w; ++t)
    fs.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t i = t; i < n; i += w) out[i] = f(i);
    }));
  for (auto& fu : fs) fu.get();
  return out;
}

Table cmd_profile(const Common& c, int points, double y_min, double y_max) {
  rtevans::detail::require(points >= 2, "--points must be >= 2");
  rtevans::detail::require(y_min < y_max, "--y-min must be below --y-max");
  const rtevans::Profile prof(c.params);
  Table t{{"y", "xi", "k0_scaled"}, {}, {}};
  for (int i = 0; i < points; ++i) {
    const double y = y_min + (y_max - y_min) * i / (points - 1);
    const auto e = prof.at(y);
    t.rows.push_back({y, e.xi, e.k0_scaled});
  }
  return t;
}

Table cmd_evans_scan(const Common& c, double eps, double lmin, double lmax, int n, double t0) {
  rtevans::detail::require(n >= 2 && lmin < lmax, "need --lambda-points >= 2 and --lambda-min < --lambda-max");
  rtevans::EvansOptions opt;
  opt.t0 = t0;
  const rtevans::EvansFunction ev(c.params.nu, eps, opt);
  const auto evals = ordered_map<rtevans::EvansEval>(static_cast<std::size_t>(n), c.jobs, [&](std::size_t i) {
    return ev(lmin + (lmax - lmin) * static_cast<double>(i) / (n - 1));
  });
  Table t{{"lambda", "epsilon", "value", "spread", "zeta_r", "valid"}, {}, {}};
  int changes = 0;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    const auto& e = evals[i];
    t.rows.push_back({e.lambda, e.epsilon, e.value, e.spread, e.zeta_r, e.valid});
    if (i && (e.value < 0) != (evals[i - 1].value < 0)) ++changes;
  }
  t.summary["sign_changes"] = changes;
  t.summary["ev_one_closed_form"] = rtevans::evans_at_one(eps, c.params.nu);
  return t;
}

Table dispersion_table(const std::vector<rtevans::DispersionRow>& rows) {
  Table t{{"k", "epsilon", "lambda_root", "gamma", "gamma_asym", "gamma_cap", "admissible", "source", "error"}, {}, {}};
  for (const auto& r : rows)
    t.rows.push_back({r.k, r.epsilon, r.lambda_root, r.gamma, r.gamma_asym, r.gamma_cap, r.admissible, r.source, r.error});
  return t;
}

Table cmd_dispersion(const Common& c, const std::vector<double>& ks, double evans_eps_max) {
  rtevans::detail::require(!ks.empty(), "--k needs at least one value");
  rtevans::DispersionOptions opt;
  opt.jobs = c.jobs;
  opt.evans_eps_max = evans_eps_max;
  return dispersion_table(rtevans::dispersion(c.params, ks, opt));
}

Table cmd_expansion(const Common& c, double lo, double hi, int n, const std::string& c0_source) {
  const double nu = c.params.nu;
  rtevans::detail::require(c0_source == "quadrature" || c0_source == "hypergeometric",
                           "--c0 must be quadrature or hypergeometric");
  const auto c0q = rtevans::c0_one(nu);
  const double c0h = rtevans::c0_one_hypergeometric(nu);
  const auto rep = rtevans::expansion_check(nu, rtevans::log_spaced(lo, hi, n), c0_source == "quadrature" ? c0q.value : c0h, c.jobs);
  Table t{{"epsilon", "lambda", "delta", "delta_predicted", "ev_one", "b0_eps"}, {}, {}};
  for (const auto& p : rep.points) t.rows.push_back({p.epsilon, p.lambda, p.delta, p.delta_predicted, p.ev_one, p.b0_eps});
  const auto cand = rtevans::b0_candidates(nu);
  t.summary = {{"slope", rep.slope},
               {"slope_required", std::min(1.0, 2 / nu) - 0.1},
               {"c_zero", rep.c_zero},
               {"b0_from_slope", rep.b0_from_slope},
               {"b0_from_roots", rep.b0_from_roots},
               {"b0_slope_match", rep.slope_match},
               {"b0_roots_match", rep.roots_match},
               {"b0_consistent", rep.b0_consistent},
               {"b0_candidates", {{"expansion", cand.expansion}, {"zero_eps_form", cand.zero_eps_form}, {"positive", cand.positive}}},
               {"c0_quadrature", c0q.value},
               {"c0_hypergeometric", c0h},
               {"r0_limit", c0q.r0_limit},
               {"second_order_measured", rep.second_order_measured},
               {"second_order_predicted", rep.second_order_predicted}};
  return t;
}

Table cmd_spectral(const Common& c, const std::vector<double>& ks, double resolution, double tol) {
  rtevans::detail::require(!ks.empty(), "--k needs at least one value");
  rtevans::SpectralOptions opt;
  opt.resolution = resolution;
  opt.convergence_tol = tol;
  struct Row {
    rtevans::SpectralResult r;
    std::string error;
  };
  const auto rows = ordered_map<Row>(ks.size(), c.jobs, [&](std::size_t i) {
    try {
      return Row{rtevans::gamma_spectral(ks[i], c.params, opt), {}};
    } catch (const std::exception& e) {
      rtevans::SpectralResult r;
      r.k = ks[i];
      r.gamma = NAN;
      return Row{r, e.what()};
    }
  });
  const double cap = rtevans::l_eff_and_cap(c.params).Lambda;
  Table t{{"k", "gamma", "gamma_cap", "min_eigenvalue", "eigenvalue_residual", "grid_change", "nodes", "error"}, {}, {}};
  for (const auto& [r, err] : rows)
    t.rows.push_back({r.k, r.gamma, cap, r.min_eigenvalue, r.eigenvalue_residual, r.grid_change,
                      static_cast<long long>(r.x.size()), err});
  return t;
}

rtevans::EvolveState read_state_file(const std::string& path, const rtevans::XGrid& grid, double k) {
  std::ifstream f(path);
  if (!f) throw rtcli::IoError("cannot read initial state " + path);
  rtevans::EvolveState s{0, {}, {}, k};
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("tau_re", 0) == 0) continue;
    std::istringstream in(line);
    double v[4];
    char comma;
    if (!(in >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3]))
      throw rtevans::ValidationError("initial state rows must be tau_re,tau_im,b_re,b_im");
    s.tau_hat.emplace_back(v[0], v[1]);
    s.b_hat.emplace_back(v[2], v[3]);
  }
  if (s.tau_hat.size() != grid.n())
    throw rtevans::ValidationError("initial state has " + std::to_string(s.tau_hat.size()) + " rows, grid has " +
                                   std::to_string(grid.n()));
  return s;
}

Table cmd_evolve(const Common& c, double k, const std::string& init, const std::string& init_file, double t_end,
                 double dt, int every) {
  rtevans::detail::require(init == "eigen" || init == "random" || init == "file", "--init must be eigen, random or file");
  const double cap = rtevans::l_eff_and_cap(c.params).Lambda;
  if (dt <= 0) dt = 0.1 / cap;
  std::optional<rtevans::SpectralResult> spec;
  std::optional<rtevans::XGrid> grid;
  if (init == "eigen") {
    spec = rtevans::gamma_spectral(k, c.params);
    grid = *spec->grid;
  } else {
    grid = rtevans::make_xgrid(rtevans::Profile(c.params), c.params, k);
  }
  const rtevans::LinearEvolver ev(*grid, k, c.params);
  rtevans::EvolveState s = init == "eigen"    ? rtevans::eigen_initial_state(*spec, c.params)
                           : init == "random" ? rtevans::random_initial_state(*grid, k, c.seed)
                                              : read_state_file(init_file, *grid, k);
  const auto traj = ev.run(s, t_end, dt, every);
  Table t{{"t", "tau_norm", "b_norm", "log_derivative"}, {}, {}};
  for (const auto& p : traj) t.rows.push_back({p.t, p.tau_norm, p.b_norm, p.log_derivative});
  t.summary["gamma_cap"] = cap;
  t.summary["nodes"] = grid->n();
  if (spec) t.summary["gamma_spectral"] = spec->gamma;
  try {
    const auto fit = rtevans::measure_growth(traj);
    t.summary["gamma_measured"] = fit.gamma_measured;
    t.summary["fit_window"] = {fit.t_a, fit.t_b};
    t.summary["r_squared"] = fit.r_squared;
  } catch (const std::exception& e) {
    t.summary["fit_error"] = e.what();
  }
  return t;
}

void print_error(const char* kind, const std::string& msg) {
  json err = {{"error", {{"kind", kind}, {"message", msg}}}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ablative Rayleigh-Taylor growth rates for the Kull-Anisimov profile"};
  app.set_version_flag("--version", std::string(rtevans::kVersion));
  app.require_subcommand(1);
  Settings settings;
  Common common;

  auto add_common = [&](CLI::App* sub) {
    settings.add(sub, "nu", common.params.nu, "thermal conduction index (> 1)");
    settings.add(sub, "g", common.params.g, "gravity");
    settings.add(sub, "L0", common.params.L0, "profile length scale");
    settings.add(sub, "rho_a", common.params.rho_a, "ablated density");
    settings.add(sub, "format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    settings.add(sub, "output", common.output, "output file (stdout if empty)");
    settings.add(sub, "jobs", common.jobs, "worker threads for sweeps");
    settings.add(sub, "seed", common.seed, "seed for random initial states");
    sub->add_option("--config", common.config, "JSON config file");
  };

  auto* prof = app.add_subcommand("profile", "tabulate xi(y) and k0");
  int points = 200;
  double y_min = -20, y_max = 20;
  add_common(prof);
  settings.add(prof, "points", points, "number of rows");
  settings.add(prof, "y_min", y_min, "left end in y = x/L0");
  settings.add(prof, "y_max", y_max, "right end in y = x/L0");

  auto* scan = app.add_subcommand("evans-scan", "Evans function on a lambda grid");
  double eps = 1e-4, lmin = 0.9, lmax = 1.3, t0 = 0.05;
  int lpoints = 41;
  add_common(scan);
  settings.add(scan, "eps", eps, "epsilon = k L0");
  settings.add(scan, "lambda_min", lmin, "");
  settings.add(scan, "lambda_max", lmax, "");
  settings.add(scan, "lambda_points", lpoints, "");
  settings.add(scan, "t0", t0, "left end of the low-density grid");

  auto* disp = app.add_subcommand("dispersion", "gamma(k) rows");
  std::vector<double> ks{0.01, 0.1, 1.0};
  double evans_eps_max = 0.3;
  add_common(disp);
  settings.add(disp, "k", ks, "wavenumbers, comma separated");
  settings.add(disp, "evans_eps_max", evans_eps_max, "largest k L0 handled by the Evans route");

  auto* expc = app.add_subcommand("expansion-check", "root sweep against the small-eps expansion");
  double eps_lo = 1e-6, eps_hi = 1e-3;
  int eps_n = 8;
  std::string c0_source = "quadrature";
  add_common(expc);
  settings.add(expc, "eps_min", eps_lo, "");
  settings.add(expc, "eps_max", eps_hi, "");
  settings.add(expc, "eps_points", eps_n, "");
  settings.add(expc, "c0", c0_source, "curvature constant: quadrature or hypergeometric");

  auto* spec = app.add_subcommand("spectral", "gamma(k) from the Schroedinger-form eigenproblem");
  std::vector<double> spec_ks{5, 10, 25};
  double resolution = 1, conv_tol = 1e-4;
  add_common(spec);
  settings.add(spec, "k", spec_ks, "wavenumbers, comma separated");
  settings.add(spec, "resolution", resolution, "grid density multiplier");
  settings.add(spec, "convergence_tol", conv_tol, "relative gamma change that stops refinement");

  auto* evo = app.add_subcommand("evolve", "time-domain evolution of one mode");
  double evo_k = 5, t_end = 40, dt = 0;
  std::string init = "eigen", init_file;
  int every = 10;
  add_common(evo);
  settings.add(evo, "k", evo_k, "wavenumber");
  settings.add(evo, "init", init, "eigen, random or file");
  settings.add(evo, "init_file", init_file, "CSV tau_re,tau_im,b_re,b_im on the grid nodes");
  settings.add(evo, "t_end", t_end, "final time");
  settings.add(evo, "dt", dt, "time step (default 0.1/Lambda)");
  settings.add(evo, "every", every, "record every n steps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("validation", e.what());
    return kValidation;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    settings.resolve(sub, read_config(common.config));
    common.params.validate();
    rtevans::detail::require(common.jobs >= 1, "--jobs must be >= 1");
    Table t;
    const std::string name = sub->get_name();
    if (sub == prof) t = cmd_profile(common, points, y_min, y_max);
    else if (sub == scan) t = cmd_evans_scan(common, eps, lmin, lmax, lpoints, t0);
    else if (sub == disp) t = cmd_dispersion(common, ks, evans_eps_max);
    else if (sub == expc) t = cmd_expansion(common, eps_lo, eps_hi, eps_n, c0_source);
    else if (sub == spec) t = cmd_spectral(common, spec_ks, resolution, conv_tol);
    else t = cmd_evolve(common, evo_k, init, init_file, t_end, dt, every);

    json cfg = settings.resolved(sub);
    // jobs never changes results, keep it out so outputs stay byte-identical across it
    cfg.erase("jobs");
    cfg.erase("output");
    const json meta = {{"version", rtevans::kVersion}, {"command", name}, {"config", cfg}};
    const std::string path = output_path(common.output);
    rtcli::emit(path, common.format, meta, t);
    if (!path.empty() && path != "-") std::cerr << name << ": wrote " << t.rows.size() << " rows to " << path << "\n";
    return kOk;
  } catch (const rtevans::ValidationError& e) {
    print_error("validation", e.what());
    return kValidation;
  } catch (const rtcli::IoError& e) {
    print_error("io", e.what());
    return kIo;
  } catch (const rtevans::NumericalError& e) {
    print_error("numerical", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    print_error("numerical", e.what());
    return kNumerical;
  }
}
