// Command-line front end: stationary profiles, bifurcation and mass-curve
// sweeps, linearization spectra, ground-state identification and time
// evolution, all emitted as CSV or JSON tables.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ftnls/cli.hpp"

namespace {

// Configuration files are plain `key = value` lines using the long flag
// names. They are expanded into synthetic `--key=value` tokens placed ahead
// of the explicit flags, and every option takes the last occurrence, so
// flags win on conflict.
bool expand_config(std::vector<std::string>& args, std::string& err) {
  std::string path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) {
        err = "--config needs a file path";
        return false;
      }
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (path.empty()) return true;

  std::ifstream in(path);
  if (!in) {
    err = "cannot open config file: " + path;
    return false;
  }
  std::vector<std::string> injected;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    injected.push_back("--" + key + "=" + value);
  }
  // insert after the subcommand token so explicit flags come later and win
  const size_t at = args.empty() ? 0 : 1;
  args.insert(args.begin() + at, injected.begin(), injected.end());
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  using ftnls::cli::Command;
  using ftnls::cli::RunConfig;

  CLI::App app{"1D NLS with a Fulop-Tsutsui point defect: stationary states, "
               "bifurcation diagrams and orbital-stability diagnostics"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::vector<std::pair<CLI::App*, Command>> subs;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--tau", cfg.tau, "jump factor tau > 0, tau != 1")->take_last();
    s->add_option("--v", cfg.v, "defect strength v > 0")->take_last();
    s->add_option("--mu", cfg.mu, "nonlinearity power mu > 0")->take_last();
    s->add_option("--grid-L", cfg.grid_L, "half-line truncation width (0 = automatic)")->take_last();
    s->add_option("--grid-N", cfg.grid_N, "intervals per half-line (0 = automatic)")->take_last();
    s->add_option("--output", cfg.output, "output table path")->take_last();
    s->add_option("--format", cfg.format, "csv or json")->take_last();
    s->add_option("--seed", cfg.seed, "seed for randomized runs")->take_last();
    s->add_option("--threads", cfg.threads, "sweep parallelism (0 = auto; NEHARI_FT_THREADS caps)")
        ->take_last();
  };
  auto add_omega = [&](CLI::App* s) {
    s->add_option("--omega", cfg.omega, "frequency omega > 0")->take_last();
  };
  auto add_sweep = [&](CLI::App* s) {
    s->add_option("--omega-min", cfg.omega_min, "sweep start")->take_last();
    s->add_option("--omega-max", cfg.omega_max, "sweep end")->take_last();
    s->add_option("--omega-steps", cfg.omega_steps, "number of sweep points")->take_last();
    s->add_flag("--log-omega", cfg.log_omega, "geometric omega spacing")->take_last();
  };

  {
    CLI::App* s = app.add_subcommand("stationary", "sample the stationary profiles at one omega");
    add_common(s);
    add_omega(s);
    subs.emplace_back(s, Command::Stationary);
  }
  {
    CLI::App* s = app.add_subcommand("bifurcation", "branch data over an omega sweep");
    add_common(s);
    add_sweep(s);
    subs.emplace_back(s, Command::Bifurcation);
  }
  {
    CLI::App* s = app.add_subcommand("mass-curve", "M(omega), M'(omega), phi and the GSS verdict");
    add_common(s);
    add_sweep(s);
    subs.emplace_back(s, Command::MassCurve);
  }
  {
    CLI::App* s = app.add_subcommand("spectral", "lowest eigenvalues of the linearizations L1 and L2");
    add_common(s);
    add_omega(s);
    subs.emplace_back(s, Command::Spectral);
  }
  {
    CLI::App* s = app.add_subcommand("ground-state", "identify the ground state (optionally verify variationally)");
    add_common(s);
    add_omega(s);
    s->add_flag("--variational", cfg.variational, "run the projected-gradient confirmation")->take_last();
    s->add_option("--max-iters", cfg.max_iters, "iteration budget for the minimizer")->take_last();
    subs.emplace_back(s, Command::GroundState);
  }
  {
    CLI::App* s = app.add_subcommand("evolve", "time evolution with trajectory diagnostics");
    add_common(s);
    add_omega(s);
    s->add_option("--dt", cfg.dt, "time step")->take_last();
    s->add_option("--t-final", cfg.t_final, "final time (default 50/omega)")->take_last();
    s->add_option("--snapshot-stride", cfg.snapshot_stride, "steps between snapshots")->take_last();
    s->add_option("--perturb", cfg.perturb, "relative amplitude of the random smooth perturbation")
        ->take_last();
    subs.emplace_back(s, Command::Evolve);
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_err;
  if (!expand_config(args, config_err)) {
    std::cerr << "{\"error\":\"usage\",\"message\":\"" << config_err << "\"}\n";
    return 2;
  }
  std::vector<const char*> cargs;
  cargs.push_back(argv[0]);
  for (const auto& a : args) cargs.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  for (const auto& [sub, command] : subs) {
    if (sub->parsed()) {
      cfg.command = command;
      return ftnls::cli::run(cfg);
    }
  }
  return 2;
}
