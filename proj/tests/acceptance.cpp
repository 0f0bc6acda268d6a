// Acceptance suite: runs every acceptance criterion at its pinned tolerance
// and prints one PASS/FAIL line per criterion. Criterion 10 is evidence for
// a conjecture and is reported as SOFT on failure (does not affect the exit
// code); every other failure makes the process exit nonzero.
//
// Usage: ftnls_acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ftnls/ftnls.hpp"
#include "support/oracles.hpp"

using namespace ftnls;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

struct Check {
  Outcome& out;
  void require(bool ok, const std::string& what) {
    if (!ok && out.pass) {
      out.pass = false;
      out.detail = what;
    }
  }
};

const DefectParams kAnchor{2.0, 1.0, 1.0, 1.0};

// parameter grid shared by criteria 2-4 (two-branch regime everywhere)
std::vector<DefectParams> parameter_grid() {
  std::vector<DefectParams> pts;
  const double taus[5] = {0.3, 0.7, 1.6, 3.0, 6.0};
  const double vs[5] = {0.3, 0.7, 1.0, 2.0, 4.0};
  const double mus[5] = {0.5, 0.9, 1.0, 1.7, 2.6};
  const double mults[5] = {1.15, 1.6, 3.0, 8.0, 25.0};
  for (double tau : taus)
    for (double v : vs)
      for (double mu : mus)
        for (double m : mults) {
          const double wd = v * v / ((tau * tau - 1.0) * (tau * tau - 1.0));
          pts.emplace_back(tau, v, mu, m * wd);
        }
  return pts;
}

// -- criterion 1 -------------------------------------------------------------

Outcome criterion_thresholds() {
  Outcome out;
  Check ck{out};
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> logtau(std::log(0.1), std::log(8.0));
  std::uniform_real_distribution<double> logv(std::log(0.1), std::log(6.0));
  int done = 0;
  while (done < 50) {
    const double tau = std::exp(logtau(rng));
    if (std::abs(tau - 1.0) < 0.03) continue;
    const double v = std::exp(logv(rng));
    const DefectParams probe(tau, v, 1.0, 1.0);
    const double ws = linear_threshold(probe);
    const double wd = regime(probe).omega_dstar;
    auto count_at = [&](double w) { return regime(DefectParams(tau, v, 1.0, w)).count; };
    ck.require(count_at(ws * (1.0 - 1e-6)) == 0, "count below omega*");
    ck.require(count_at(ws * (1.0 + 1e-6)) == 1, "count above omega*");
    ck.require(count_at(wd * (1.0 - 1e-6)) == 1, "count below omega**");
    ck.require(count_at(wd * (1.0 + 1e-6)) == 2, "count above omega**");
    // the branch constructors agree with the counts
    bool tilde_lo = true;
    try {
      branch_tilde(DefectParams(tau, v, 1.0, ws * (1.0 - 1e-6)));
      tilde_lo = false;
    } catch (const no_solution_error&) {
    }
    ck.require(tilde_lo, "tilde constructor below omega*");
    try {
      branch_tilde(DefectParams(tau, v, 1.0, ws * (1.0 + 1e-6)));
      branch_hat(DefectParams(tau, v, 1.0, wd * (1.0 + 1e-6)));
    } catch (const error& e) {
      ck.require(false, std::string("constructor in admissible regime: ") + e.what());
    }
    bool hat_lo = true;
    try {
      branch_hat(DefectParams(tau, v, 1.0, wd * (1.0 - 1e-6)));
      hat_lo = false;
    } catch (const no_solution_error&) {
    }
    ck.require(hat_lo, "hat constructor below omega**");
    ++done;
  }
  return out;
}

// -- criterion 2 -------------------------------------------------------------

Outcome criterion_newton_oracle() {
  Outcome out;
  Check ck{out};
  for (const DefectParams& p : parameter_grid()) {
    const auto roots = oracle::newton_roots(p.tau, p.v, p.mu, p.omega);
    ck.require(roots.size() == 2, "oracle must find both roots");
    if (roots.size() != 2) continue;
    const auto bt = branch_tilde(p);
    const auto bh = branch_hat(p);
    ck.require(oracle::root_distance(roots, bt.T_minus, bt.T_plus) < 1e-10, "tilde vs Newton oracle");
    ck.require(oracle::root_distance(roots, bh.T_minus, bh.T_plus) < 1e-10, "hat vs Newton oracle");
  }
  return out;
}

// -- criterion 3 -------------------------------------------------------------

Outcome criterion_norm_identities() {
  Outcome out;
  Check ck{out};
  for (const DefectParams& p : parameter_grid()) {
    for (const auto& b : {branch_tilde(p), branch_hat(p)}) {
      const auto cf = closed_form_report(b);
      const auto gq = evaluate(build_stationary(b, grid_for_branch(b, 4000, 1.2e-3)), p);
      ck.require(oracle::rel_err(gq.kinetic, cf.kinetic) <= 1e-6, "kinetic identity");
      ck.require(oracle::rel_err(gq.mass2, cf.mass2) <= 1e-6, "mass identity");
      ck.require(oracle::rel_err(gq.lp, cf.lp) <= 1e-6, "lp identity");
      ck.require(oracle::rel_err(gq.defect, cf.defect) <= 1e-6, "defect identity");
    }
  }
  // anchor set
  const auto b = branch_tilde(kAnchor);
  const auto r = evaluate(build_stationary(b, grid_for_branch(b, 30000, 5e-4)), kAnchor);
  ck.require(std::abs(r.mass2 - 2.20072) < 1e-4, "anchor mass");
  ck.require(std::abs(r.lp - 2.60141) < 1e-4, "anchor lp");
  ck.require(std::abs(r.kinetic - 0.90007) < 1e-4, "anchor kinetic");
  ck.require(std::abs(r.defect - 0.49944) < 1e-4, "anchor defect");
  ck.require(std::abs(r.nehari) < 1e-5, "anchor Nehari residual");
  return out;
}

// -- criterion 4 -------------------------------------------------------------

Outcome criterion_ground_state() {
  Outcome out;
  Check ck{out};
  for (const DefectParams& p : parameter_grid()) {
    const auto gs = identify(p);
    ck.require(gs.winner == GroundStateWinner::Tilde, "tilde wins in the two-branch regime");
    ck.require(gs.report_tilde.reduced < gs.report_hat->reduced, "reduced action comparison");
  }
  const auto gs = identify(kAnchor);
  ck.require(std::abs(gs.report_tilde.reduced - 0.65035) < 1e-3, "anchor S~ tilde");
  ck.require(std::abs(gs.report_hat->reduced - 1.55107) < 1e-3, "anchor S~ hat");
  return out;
}

// -- criterion 5 -------------------------------------------------------------

Outcome criterion_variational() {
  Outcome out;
  Check ck{out};
  const HalfLineGrid g(40.0, 4000);
  const double d = identify(kAnchor).d_omega;
  const auto hat_start = build_stationary(branch_hat(kAnchor), g).scaled(0.995);
  const std::vector<std::optional<PiecewiseField>> inits = {
      std::nullopt,  // dipole default
      std::optional<PiecewiseField>(hat_start),
      std::optional<PiecewiseField>(random_initial_field(kAnchor, g, 2024)),
  };
  for (size_t i = 0; i < inits.size(); ++i) {
    const auto mr = variational_minimize(kAnchor, g, MinimizeOptions{4000, 1e-6, 45}, inits[i]);
    ck.require(std::abs(mr.value - d) <= 1e-3 * d,
               "variational value from initialization " + std::to_string(i));
    ck.require(mr.nehari_residual <= 1e-8 * std::max(1.0, mr.lp),
               "on-manifold residual from initialization " + std::to_string(i));
  }
  return out;
}

// -- criterion 6 -------------------------------------------------------------

Outcome criterion_spectral() {
  Outcome out;
  Check ck{out};
  for (int n : {4000, 8000}) {
    const HalfLineGrid g(40.0, n);
    const auto rep2 = spectral_report(build_operator(OperatorKind::L2, kAnchor, g));
    ck.require(rep2.n_negative == 0, "L2 negative count at N=" + std::to_string(n));
    ck.require(std::abs(rep2.lambda_kernel) <= rep2.zero_tolerance,
               "L2 kernel eigenvalue at N=" + std::to_string(n));
    if (n == 4000) ck.require(rep2.kernel_vector_residual <= 1e-3, "L2 kernel angle");
    const auto rep1 = spectral_report(build_operator(OperatorKind::L1, kAnchor, g));
    ck.require(rep1.n_negative == 1, "L1 negative count at N=" + std::to_string(n));
    ck.require(std::abs(rep1.lambda_kernel) > rep1.zero_tolerance,
               "L1 numerical kernel must be empty at N=" + std::to_string(n));
  }
  return out;
}

// -- criterion 7 -------------------------------------------------------------

Outcome criterion_monotonicity() {
  Outcome out;
  Check ck{out};
  for (double tau : {0.5, 2.0, 5.0}) {
    for (double mu : {0.5, 1.0, 2.0}) {
      const double ws = linear_threshold(DefectParams(tau, 1.0, mu, 1.0));
      double prev_phi = 1e300, prev_mass = 0.0;
      for (int i = 0; i < 200; ++i) {
        const double w = 1.05 * ws * std::pow(100.0 / 1.05, i / 199.0);
        const DefectParams p(tau, 1.0, mu, w);
        const double f = tilde_phi(p);
        const double m = tilde_mass(p);
        ck.require(f < prev_phi, "phi strictly decreasing");
        ck.require(m > prev_mass, "mass strictly increasing");
        prev_phi = f;
        prev_mass = m;
      }
    }
  }
  return out;
}

// -- criterion 8 -------------------------------------------------------------

constexpr double kOmegaCritRegression = 0.17695;  // located once, tracked thereafter

Outcome criterion_mass_curve_supercritical(double& omega_crit_out) {
  Outcome out;
  Check ck{out};
  const DefectParams probe(2.0, 1.0, 3.0, 1.0);
  const double ws = linear_threshold(probe);
  const int n = 400;
  std::vector<double> w(n), m(n);
  for (int i = 0; i < n; ++i) {
    w[i] = 1.05 * ws * std::pow(20.0 / (1.05 * ws), i / (n - 1.0));
    m[i] = tilde_mass(DefectParams(2.0, 1.0, 3.0, w[i]));
  }
  int changes = 0;
  int idx = -1;
  for (int i = 2; i < n; ++i) {
    const double d0 = m[i - 1] - m[i - 2], d1 = m[i] - m[i - 1];
    if ((d0 > 0 && d1 < 0) || (d0 < 0 && d1 > 0)) {
      ++changes;
      idx = i;
    }
  }
  ck.require(changes == 1, "exactly one sign change of M' on (omega*, 20]");
  if (changes == 1) {
    // bisection on M' over the bracketing interval
    double lo = w[idx - 2], hi = w[idx];
    auto dmass = [](double x) {
      const DefectParams p(2.0, 1.0, 3.0, x);
      return gss_verdict(p).dmass;
    };
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (dmass(mid) > 0)
        lo = mid;
      else
        hi = mid;
    }
    omega_crit_out = 0.5 * (lo + hi);
    ck.require(std::abs(omega_crit_out - kOmegaCritRegression) <= 0.02 * kOmegaCritRegression,
               "omega_crit regression value " + std::to_string(omega_crit_out));
  }
  return out;
}

// -- criteria 9 and 10 --------------------------------------------------------

Outcome criterion_orbital_stability() {
  Outcome out;
  Check ck{out};
  const HalfLineGrid g(40.0, 4000);
  const auto ref = build_stationary(branch_tilde(kAnchor), g);
  const auto u0 = perturb_field(ref, kAnchor, 0.01, 4242);

  EvolutionConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 50.0;
  cfg.snapshot_stride = 250;
  const auto rep = evolve(u0, kAnchor, cfg, ref);
  ck.require(!rep.blown_up, "no blow-up in the stable run");
  const double d0 = rep.orbital_distance.front();
  ck.require(d0 > 0, "nonzero initial distance");
  double worst = 0;
  for (double dd : rep.orbital_distance) worst = std::max(worst, dd);
  ck.require(worst <= 10.0 * d0, "orbital distance within 10x of the initial value");
  for (double md : rep.mass_drift) ck.require(md <= 1e-10, "mass drift below 1e-10");

  // dt-halving factor for the energy drift: RMS over aligned snapshots on a
  // shorter horizon, with the pair chosen inside the scheme's quadratic
  // regime (finer pairs decay faster than dt^2 on near-stationary orbits)
  auto drift = [&](double dt) {
    EvolutionConfig c;
    c.dt = dt;
    c.t_final = 5.0;
    c.snapshot_stride = static_cast<int>(std::llround(0.4 / dt));
    const auto r = evolve(u0, kAnchor, c);
    double rms = 0;
    for (double e : r.energy_drift) rms += e * e;
    return std::sqrt(rms / r.energy_drift.size());
  };
  const double f = drift(4e-3) / drift(2e-3);
  ck.require(f >= 3.4 && f <= 4.6, "energy-drift halving factor " + std::to_string(f));
  return out;
}

Outcome criterion_instability_evidence(double omega_crit) {
  Outcome out;
  Check ck{out};
  const double omega = 16.0 * omega_crit;  // far above the located critical value
  const DefectParams p(2.0, 1.0, 3.0, omega);
  const auto b = branch_tilde(p);
  const HalfLineGrid g(40.0, 4000);
  const auto ref = build_stationary(b, g);
  const auto u0 = perturb_field(ref, p, 0.01, 777);
  EvolutionConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 50.0;
  cfg.snapshot_stride = 100;
  const auto rep = evolve(u0, p, cfg, ref);
  const double d0 = rep.orbital_distance.front();
  double worst = 0;
  for (double dd : rep.orbital_distance) worst = std::max(worst, dd);
  const bool escaped = worst > 10.0 * d0 || rep.blown_up;
  ck.require(escaped, "perturbation must leave the 10x orbital neighborhood (max " +
                          std::to_string(worst / d0) + "x)");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  auto selected = [&](int k) { return wanted.empty() || wanted.count(k) > 0; };

  int failures = 0;
  double omega_crit = kOmegaCritRegression;

  struct Item {
    int id;
    const char* label;
    std::function<Outcome()> run;
    bool soft = false;
  };
  const std::vector<Item> items = {
      {1, "thresholds: branch counts switch at omega* and omega**", criterion_thresholds},
      {2, "closed-form branches match the 2D Newton oracle to 1e-10", criterion_newton_oracle},
      {3, "norm identities agree with grid quadrature to 1e-6", criterion_norm_identities},
      {4, "ground-state identification: tilde below hat everywhere", criterion_ground_state},
      {5, "variational minimizer reaches d(omega) from 3 initializations", criterion_variational},
      {6, "spectral hypotheses for L1/L2 at N=4000 and N=8000", criterion_spectral},
      {7, "phi decreasing and mass increasing on 200-point log grids", criterion_monotonicity},
      {8, "supercritical mass curve: single extremum, omega_crit regression",
       [&] { return criterion_mass_curve_supercritical(omega_crit); }},
      {9, "orbital stability: 1%-perturbed run stays within 10x to t=50", criterion_orbital_stability},
      {10, "instability evidence above omega_crit (soft)",
       [&] { return criterion_instability_evidence(omega_crit); }, true},
  };

  for (const auto& item : items) {
    if (!selected(item.id)) continue;
    const double t0 = now_seconds();
    Outcome out;
    try {
      out = item.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double dt = now_seconds() - t0;
    if (out.pass) {
      std::printf("PASS criterion %2d  [%6.1fs]  %s\n", item.id, dt, item.label);
    } else {
      std::printf("%s criterion %2d  [%6.1fs]  %s -- %s\n", item.soft ? "FAIL (soft)" : "FAIL", item.id,
                  dt, item.label, out.detail.c_str());
      if (!item.soft) ++failures;
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
