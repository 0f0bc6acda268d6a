#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ftnls/closedform.hpp"
#include "ftnls/core.hpp"
#include "ftnls/dynamics.hpp"
#include "ftnls/errors.hpp"
#include "ftnls/functionals.hpp"
#include "ftnls/groundstate.hpp"
#include "ftnls/spectral.hpp"
#include "ftnls/stability.hpp"
#include "ftnls/version.hpp"

namespace ftnls::cli {

enum class Command { Stationary, Bifurcation, MassCurve, Spectral, GroundState, Evolve };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::Stationary: return "stationary";
    case Command::Bifurcation: return "bifurcation";
    case Command::MassCurve: return "mass-curve";
    case Command::Spectral: return "spectral";
    case Command::GroundState: return "ground-state";
    default: return "evolve";
  }
}

struct RunConfig {
  Command command = Command::Stationary;
  double tau = 2.0;
  double v = 1.0;
  double mu = 1.0;
  double omega = 0.0;  // 0 = not set
  double grid_L = 0.0; // 0 = automatic
  int grid_N = 0;      // 0 = automatic
  double dt = 1e-3;
  double t_final = 0.0;  // 0 = automatic horizon 50/omega
  int snapshot_stride = 100;
  double omega_min = 0.0;
  double omega_max = 0.0;
  int omega_steps = 0;
  bool log_omega = false;
  std::string output;
  std::string format = "csv";  // csv | json
  long seed = 1;
  double perturb = 0.0;
  bool variational = false;
  int max_iters = 2000;
  int threads = 0;  // 0 = auto, capped by NEHARI_FT_THREADS
};

// ---------------------------------------------------------------------------
// formatting

/// 17 significant digits: round-trip exact and byte-stable across runs.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string fmt17(const std::optional<double>& x) { return x ? fmt17(*x) : std::string(); }

inline std::string canonical_config(const RunConfig& c) {
  std::ostringstream os;
  os << to_string(c.command) << " tau=" << fmt17(c.tau) << " v=" << fmt17(c.v) << " mu=" << fmt17(c.mu);
  if (c.omega > 0) os << " omega=" << fmt17(c.omega);
  if (c.omega_steps > 0)
    os << " omega-min=" << fmt17(c.omega_min) << " omega-max=" << fmt17(c.omega_max)
       << " omega-steps=" << c.omega_steps << " log-omega=" << (c.log_omega ? 1 : 0);
  if (c.grid_L > 0) os << " grid-L=" << fmt17(c.grid_L);
  if (c.grid_N > 0) os << " grid-N=" << c.grid_N;
  if (c.command == Command::Evolve)
    os << " dt=" << fmt17(c.dt) << " t-final=" << fmt17(c.t_final) << " stride=" << c.snapshot_stride
       << " perturb=" << fmt17(c.perturb) << " seed=" << c.seed;
  if (c.command == Command::GroundState) os << " variational=" << (c.variational ? 1 : 0);
  os << " format=" << c.format;
  return os.str();
}

namespace detail {

inline int effective_threads(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NEHARI_FT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

template <class F>
void parallel_for(size_t count, int threads, F&& body) {
  if (threads <= 1 || count < 8) {
    for (size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

inline std::vector<double> omega_grid(const RunConfig& c) {
  if (c.omega_steps < 1 || !(c.omega_min > 0.0) || !(c.omega_max >= c.omega_min))
    throw invalid_params_error("sweep needs --omega-min, --omega-max and --omega-steps");
  std::vector<double> w(c.omega_steps);
  if (c.omega_steps == 1) {
    w[0] = c.omega_min;
    return w;
  }
  if (c.log_omega) {
    const double r = std::log(c.omega_max / c.omega_min) / (c.omega_steps - 1);
    for (int i = 0; i < c.omega_steps; ++i) w[i] = c.omega_min * std::exp(r * i);
  } else {
    const double d = (c.omega_max - c.omega_min) / (c.omega_steps - 1);
    for (int i = 0; i < c.omega_steps; ++i) w[i] = c.omega_min + d * i;
  }
  return w;
}

/// Table writer shared by every subcommand: CSV with one comment line, or a
/// JSON document with the same rows (empty cells become nulls).
class TableWriter {
 public:
  TableWriter(const RunConfig& cfg, std::vector<std::string> columns)
      : cfg_(cfg), columns_(std::move(columns)) {}

  void add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  void write() const {
    std::ofstream out(cfg_.output);
    if (!out) throw config_error("cannot open output file: " + cfg_.output);
    if (cfg_.format == "json") {
      nlohmann::json doc;
      doc["artifact"] = "ftnls";
      doc["version"] = version;
      doc["config"] = canonical_config(cfg_);
      doc["columns"] = columns_;
      nlohmann::json jrows = nlohmann::json::array();
      for (const auto& r : rows_) {
        nlohmann::json jr = nlohmann::json::array();
        for (const auto& cell : r) {
          if (cell.empty())
            jr.push_back(nullptr);
          else {
            char* end = nullptr;
            const double val = std::strtod(cell.c_str(), &end);
            if (end && *end == '\0')
              jr.push_back(val);
            else
              jr.push_back(cell);
          }
        }
        jrows.push_back(std::move(jr));
      }
      doc["rows"] = std::move(jrows);
      out << doc.dump(2) << "\n";
    } else {
      out << "# ftnls " << version << " | " << canonical_config(cfg_) << "\n";
      for (size_t j = 0; j < columns_.size(); ++j) out << columns_[j] << (j + 1 < columns_.size() ? "," : "");
      out << "\n";
      for (const auto& r : rows_) {
        for (size_t j = 0; j < r.size(); ++j) out << r[j] << (j + 1 < r.size() ? "," : "");
        out << "\n";
      }
    }
  }

 private:
  const RunConfig& cfg_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

inline HalfLineGrid make_grid(const RunConfig& c, const DefectParams& p) {
  double L = c.grid_L;
  if (L <= 0) {
    L = HalfLineGrid::default_width(p.omega, p.mu);
    try {
      L = std::max(L, branch_width(branch_tilde(p)));
      const ExistenceRegime r = regime(p);
      if (r.count == 2) L = std::max(L, branch_width(branch_hat(p)));
    } catch (const no_solution_error&) {
      // keep the default width; the caller will surface the regime error
    }
  }
  const int n = c.grid_N > 0 ? c.grid_N : 4000;
  return HalfLineGrid(L, n);
}

// -- subcommands -------------------------------------------------------------

inline void run_stationary(const RunConfig& c) {
  const DefectParams p(c.tau, c.v, c.mu, c.omega);
  const ExistenceRegime r = regime(p);
  if (r.count == 0)
    throw no_solution_error("no stationary state at omega = " + fmt17(p.omega) +
                                "; admissible interval starts at omega* = " + fmt17(r.omega_star) +
                                " (second branch above omega** = " + fmt17(r.omega_dstar) + ")",
                            r.omega_star, r.omega_dstar);
  const HalfLineGrid grid = make_grid(c, p);
  const StationaryBranch tb = branch_tilde(p);
  const PiecewiseField ut = build_stationary(tb, grid);
  std::optional<PiecewiseField> uh;
  if (r.count == 2) uh = build_stationary(branch_hat(p), grid);

  TableWriter t(c, {"x", "u_tilde", "u_hat"});
  for (int i = 0; i <= grid.N; ++i) {
    t.add_row({fmt17(grid.x_minus(i)), fmt17(ut.values_minus()[i].real()),
               uh ? fmt17(uh->values_minus()[i].real()) : std::string()});
  }
  for (int i = 0; i <= grid.N; ++i) {
    t.add_row({fmt17(grid.x_plus(i)), fmt17(ut.values_plus()[i].real()),
               uh ? fmt17(uh->values_plus()[i].real()) : std::string()});
  }
  t.write();
}

inline void run_bifurcation(const RunConfig& c) {
  const std::vector<double> omegas = omega_grid(c);
  SweepOptions so;
  so.threads = effective_threads(c.threads);
  const auto rows = bifurcation_sweep(c.tau, c.v, c.mu, omegas, so);

  TableWriter t(c, {"omega", "count", "T_tilde_minus", "T_tilde_plus", "x_tilde_minus", "x_tilde_plus",
                    "T_hat_minus", "T_hat_plus", "x_hat_minus", "x_hat_plus", "mass_tilde", "mass_hat",
                    "s_reduced_tilde", "s_reduced_hat"});
  for (const auto& row : rows) {
    std::vector<std::string> cells(14);
    cells[0] = fmt17(row.omega);
    cells[1] = std::to_string(row.count);
    if (row.tilde) {
      cells[2] = fmt17(row.tilde->T_minus);
      cells[3] = fmt17(row.tilde->T_plus);
      cells[4] = fmt17(row.tilde->x_minus);
      cells[5] = fmt17(row.tilde->x_plus);
    }
    if (row.hat) {
      cells[6] = fmt17(row.hat->T_minus);
      cells[7] = fmt17(row.hat->T_plus);
      cells[8] = fmt17(row.hat->x_minus);
      cells[9] = fmt17(row.hat->x_plus);
    }
    cells[10] = fmt17(row.mass_tilde);
    cells[11] = fmt17(row.mass_hat);
    cells[12] = fmt17(row.s_reduced_tilde);
    cells[13] = fmt17(row.s_reduced_hat);
    t.add_row(std::move(cells));
  }
  t.write();
}

inline void run_mass_curve(const RunConfig& c) {
  const std::vector<double> omegas = omega_grid(c);
  struct Row {
    std::optional<double> mass, dmass, phi;
    std::string verdict;
  };
  std::vector<Row> rows(omegas.size());
  parallel_for(omegas.size(), effective_threads(c.threads), [&](size_t i) {
    try {
      const DefectParams p(c.tau, c.v, c.mu, omegas[i]);
      if (regime(p).count == 0) return;  // empty row below the threshold
      rows[i].mass = tilde_mass(p);
      rows[i].phi = tilde_phi(p);
      const StabilityVerdict sv = gss_verdict(p);
      rows[i].dmass = sv.dmass;
      rows[i].verdict = to_string(sv.verdict);
    } catch (const error&) {
      // dmass/verdict cells stay empty for rows the omega stencil cannot reach
    }
  });

  TableWriter t(c, {"omega", "mass", "dmass_domega", "phi", "verdict"});
  for (size_t i = 0; i < omegas.size(); ++i)
    t.add_row({fmt17(omegas[i]), fmt17(rows[i].mass), fmt17(rows[i].dmass), fmt17(rows[i].phi),
               rows[i].verdict});
  t.write();
}

inline void run_spectral(const RunConfig& c) {
  const DefectParams p(c.tau, c.v, c.mu, c.omega);
  const HalfLineGrid grid = make_grid(c, p);
  TableWriter t(c, {"operator", "index", "eigenvalue"});
  for (OperatorKind kind : {OperatorKind::L1, OperatorKind::L2}) {
    const SpectralReport rep = spectral_report(build_operator(kind, p, grid));
    const char* name = kind == OperatorKind::L1 ? "L1" : "L2";
    for (size_t i = 0; i < rep.eigenvalues.size(); ++i)
      t.add_row({name, std::to_string(i), fmt17(rep.eigenvalues[i])});
    std::cout << name << ": n_negative=" << rep.n_negative << " lambda_min=" << fmt17(rep.lambda_min)
              << " lambda_kernel=" << fmt17(rep.lambda_kernel)
              << " kernel_angle_sin=" << fmt17(rep.kernel_vector_residual)
              << " zero_tol=" << fmt17(rep.zero_tolerance) << "\n";
  }
  t.write();
}

inline void run_ground_state(const RunConfig& c) {
  const DefectParams p(c.tau, c.v, c.mu, c.omega);
  GroundStateResult gs = identify(p);
  std::optional<MinimizeResult> mr;
  if (c.variational) {
    const HalfLineGrid grid = make_grid(c, p);
    MinimizeOptions opt;
    opt.max_iterations = c.max_iters;
    mr = variational_minimize(p, grid, opt);
    gs.variational_value = mr->value;
  }

  TableWriter t(c, {"key", "value"});
  t.add_row({"winner", gs.winner == GroundStateWinner::OnlyTilde
                           ? "only-tilde"
                           : (gs.winner == GroundStateWinner::Tilde ? "tilde" : "hat")});
  t.add_row({"d_omega", fmt17(gs.d_omega)});
  t.add_row({"T_tilde_minus", fmt17(gs.tilde.T_minus)});
  t.add_row({"T_tilde_plus", fmt17(gs.tilde.T_plus)});
  t.add_row({"mass_tilde", fmt17(gs.report_tilde.mass2)});
  t.add_row({"s_reduced_tilde", fmt17(gs.report_tilde.reduced)});
  if (gs.report_hat) {
    t.add_row({"mass_hat", fmt17(gs.report_hat->mass2)});
    t.add_row({"s_reduced_hat", fmt17(gs.report_hat->reduced)});
  }
  if (mr) {
    t.add_row({"variational_value", fmt17(mr->value)});
    t.add_row({"variational_converged", mr->converged ? "1" : "0"});
    t.add_row({"variational_iterations", std::to_string(mr->iterations)});
    t.add_row({"variational_nehari_residual", fmt17(mr->nehari_residual)});
  }
  t.write();
}

inline void run_evolve(const RunConfig& c) {
  const DefectParams p(c.tau, c.v, c.mu, c.omega);
  const HalfLineGrid grid = make_grid(c, p);
  const PiecewiseField reference = build_stationary(branch_tilde(p), grid);
  PiecewiseField u0 = reference;
  if (c.perturb != 0.0) u0 = perturb_field(reference, p, c.perturb, static_cast<uint64_t>(c.seed));

  EvolutionConfig ec;
  ec.dt = c.dt;
  ec.t_final = c.t_final > 0 ? c.t_final : 50.0 / p.omega;
  ec.snapshot_stride = c.snapshot_stride;
  const TrajectoryReport rep = evolve(u0, p, ec, reference);

  TableWriter t(c, {"t", "mass_drift", "energy_drift", "orbital_distance"});
  for (size_t i = 0; i < rep.times.size(); ++i)
    t.add_row({fmt17(rep.times[i]), fmt17(rep.mass_drift[i]), fmt17(rep.energy_drift[i]),
               fmt17(rep.orbital_distance[i])});
  t.write();
  if (rep.blown_up)
    std::cout << "blow-up detected at t = " << fmt17(rep.blowup_time) << "; report truncated\n";
}

}  // namespace detail

/// Execute one validated run configuration. Exit codes: 0 success,
/// 2 invalid parameters/usage, 3 numerical or module error (a
/// machine-readable record goes to stderr).
inline int run(const RunConfig& cfg) {
  auto fail = [&](int code, const std::string& kind, const std::string& msg,
                  std::optional<std::pair<double, double>> thresholds = std::nullopt) {
    nlohmann::json err;
    err["error"] = kind;
    err["message"] = msg;
    err["command"] = to_string(cfg.command);
    if (thresholds) {
      err["omega_star"] = thresholds->first;
      err["omega_dstar"] = thresholds->second;
    }
    std::cerr << err.dump() << "\n";
    return code;
  };

  if (cfg.output.empty()) return fail(2, "usage", "an --output path is required");
  if (cfg.format != "csv" && cfg.format != "json") return fail(2, "usage", "--format must be csv or json");
  const bool needs_omega = cfg.command == Command::Stationary || cfg.command == Command::Spectral ||
                           cfg.command == Command::GroundState || cfg.command == Command::Evolve;
  if (needs_omega && !(cfg.omega > 0.0)) return fail(2, "usage", "this subcommand needs --omega > 0");

  try {
    switch (cfg.command) {
      case Command::Stationary: detail::run_stationary(cfg); break;
      case Command::Bifurcation: detail::run_bifurcation(cfg); break;
      case Command::MassCurve: detail::run_mass_curve(cfg); break;
      case Command::Spectral: detail::run_spectral(cfg); break;
      case Command::GroundState: detail::run_ground_state(cfg); break;
      case Command::Evolve: detail::run_evolve(cfg); break;
    }
  } catch (const invalid_params_error& e) {
    return fail(2, "invalid-params", e.what());
  } catch (const no_solution_error& e) {
    return fail(3, "no-solution", e.what(), std::make_pair(e.omega_star(), e.omega_dstar()));
  } catch (const error& e) {
    return fail(3, "numerical", e.what());
  }
  return 0;
}

}  // namespace ftnls::cli
