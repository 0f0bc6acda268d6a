#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ftnls/closedform.hpp"
#include "ftnls/errors.hpp"
#include "ftnls/functionals.hpp"
#include "ftnls/quadrature.hpp"
#include "ftnls/spectral.hpp"

namespace ftnls {

/// phi(omega) = int_{T-}^{T+} (1 - t^2)^{1/mu - 1} dt along the tilde branch.
inline double tilde_phi(const DefectParams& p) {
  const StationaryBranch b = branch_tilde(p);
  return quad::unit_moment(1.0 / p.mu - 1.0, b.T_minus, b.T_plus);
}

/// M(omega) = ||u_tilde||_2^2 through the closed-form mass identity
///   M = ((mu+1)^{1/mu} / mu) omega^{1/mu - 1/2} ( int_{-1}^{1} (1-t^2)^{1/mu-1} dt - phi(omega) ).
inline double tilde_mass(const DefectParams& p) { return closed_form_report(branch_tilde(p)).mass2; }

/// d/domega of the tilde endpoints:
///   T-' = -(v / 2(tau^{2mu+4}-1)) ( omega^{-3/2} - v tau^{2mu+2} / (omega^2 sqrt(A)) )
///   T+' = -(v / 2(tau^{2mu+4}-1)) ( tau^{2mu+2} omega^{-3/2} - v tau^{2mu} / (omega^2 sqrt(A)) ).
inline std::pair<double, double> tilde_branch_derivative(const DefectParams& p) {
  branch_tilde(p);  // existence check
  const double t2m = std::pow(p.tau, 2.0 * p.mu);
  const double t2m2 = std::pow(p.tau, 2.0 * p.mu + 2.0);
  const double denom = std::pow(p.tau, 2.0 * p.mu + 4.0) - 1.0;
  const double sq = std::sqrt(detail::branch_discriminant(p));
  const double c = -p.v / (2.0 * denom);
  const double o32 = std::pow(p.omega, -1.5);
  const double o2s = p.omega * p.omega * sq;
  return {c * (o32 - p.v * t2m2 / o2s), c * (t2m2 * o32 - p.v * t2m / o2s)};
}

/// phi'(omega) from the endpoint derivatives.
inline double tilde_phi_derivative(const DefectParams& p) {
  const StationaryBranch b = branch_tilde(p);
  const auto [dtm, dtp] = tilde_branch_derivative(p);
  const double e = 1.0 / p.mu - 1.0;
  return std::pow(1.0 - b.T_plus * b.T_plus, e) * dtp - std::pow(1.0 - b.T_minus * b.T_minus, e) * dtm;
}

enum class Verdict { Stable, Unstable, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "Stable";
    case Verdict::Unstable: return "Unstable";
    default: return "Inconclusive";
  }
}

struct StabilityVerdict {
  double omega = 0;
  double mass = 0;
  double dmass = 0;  // M'(omega), centered differences
  double phi = 0;
  double dphi = 0;
  bool spectral_ok = true;
  Verdict verdict = Verdict::Inconclusive;
};

struct GssOptions {
  double rel_step = 1e-3;    // finite-difference step, relative to omega
  bool run_spectral = false; // verify the L1/L2 counts instead of assuming them
  int spectral_intervals = 4000;
};

namespace detail {

/// Five-point centered first derivative with a Richardson consistency check:
/// the halved step must agree within 1% (or within the caller's noise
/// floor, for derivatives crossing zero), otherwise the value is noise.
template <class F>
double checked_derivative(F&& f, double x, double step, double noise_floor) {
  auto d5 = [&](double s) {
    return (-f(x + 2.0 * s) + 8.0 * f(x + s) - 8.0 * f(x - s) + f(x - 2.0 * s)) / (12.0 * s);
  };
  const double d1 = d5(step);
  const double d2 = d5(0.5 * step);
  if (std::abs(d2 - d1) > std::max(0.01 * std::abs(d2), noise_floor))
    throw numerical_error("finite-difference derivative failed the step-halving check");
  return d2;
}

}  // namespace detail

/// GSS verdict at one parameter point. The spectral hypotheses hold for all
/// admissible parameters, so by default spectral_ok is assumed; set
/// run_spectral to recheck them numerically. The M'(omega) sign decides:
/// positive -> Stable, negative -> Unstable, |M'| <= 1e-8 M/omega -> Inconclusive.
inline StabilityVerdict gss_verdict(const DefectParams& p, const GssOptions& opt = {}) {
  const ExistenceRegime r = regime(p);
  if (r.count == 0)
    throw no_solution_error("gss_verdict: omega below the existence threshold", r.omega_star, r.omega_dstar);
  const double step = opt.rel_step * p.omega;
  if (p.omega - 5.0 * step <= r.omega_star)
    throw threshold_proximity_error("gss_verdict: omega within 5 finite-difference steps of the threshold; "
                                    "use a smaller rel_step");

  StabilityVerdict sv;
  sv.omega = p.omega;
  sv.mass = tilde_mass(p);
  sv.phi = tilde_phi(p);
  sv.dphi = tilde_phi_derivative(p);
  const double noise_floor = 1e-8 * sv.mass / p.omega;  // the Inconclusive band
  sv.dmass = detail::checked_derivative(
      [&](double w) { return tilde_mass(DefectParams(p.tau, p.v, p.mu, w)); }, p.omega, step, noise_floor);

  if (opt.run_spectral) {
    const HalfLineGrid grid = HalfLineGrid::with_resolution(
        p, branch_width(branch_tilde(p)), opt.spectral_intervals);
    const SpectralReport r2 = spectral_report(build_operator(OperatorKind::L2, p, grid));
    const SpectralReport r1 = spectral_report(build_operator(OperatorKind::L1, p, grid));
    sv.spectral_ok = r2.n_negative == 0 && std::abs(r2.lambda_kernel) <= r2.zero_tolerance &&
                     r1.n_negative == 1 && std::abs(r1.lambda_kernel) > r1.zero_tolerance;
  }

  const double tol = 1e-8 * sv.mass / p.omega;
  if (std::abs(sv.dmass) <= tol)
    sv.verdict = Verdict::Inconclusive;
  else if (!sv.spectral_ok)
    sv.verdict = Verdict::Inconclusive;
  else
    sv.verdict = sv.dmass > 0 ? Verdict::Stable : Verdict::Unstable;
  return sv;
}

/// One row of the bifurcation table. Absent branches leave empty optionals;
/// a per-row failure is recorded in `note` instead of aborting the sweep.
struct BifurcationRow {
  double omega = 0;
  int count = 0;
  std::optional<StationaryBranch> tilde;
  std::optional<StationaryBranch> hat;
  std::optional<double> mass_tilde;
  std::optional<double> mass_hat;
  std::optional<double> s_reduced_tilde;
  std::optional<double> s_reduced_hat;
  std::optional<Verdict> verdict;
  std::string note;
};

struct SweepOptions {
  bool with_verdict = false;
  int threads = 1;  // 0 = hardware concurrency
};

/// Evaluate the branch data over a sorted omega grid. Rows are independent
/// and may be computed in parallel; the output is ordered by omega
/// regardless of the thread count.
inline std::vector<BifurcationRow> bifurcation_sweep(double tau, double v, double mu,
                                                     std::span<const double> omegas,
                                                     const SweepOptions& opt = {}) {
  for (size_t i = 0; i < omegas.size(); ++i) {
    if (!(omegas[i] > 0.0)) throw invalid_params_error("bifurcation_sweep: omega grid must be positive");
    if (i > 0 && omegas[i] < omegas[i - 1])
      throw invalid_params_error("bifurcation_sweep: omega grid must be sorted ascending");
  }
  std::vector<BifurcationRow> rows(omegas.size());

  auto work = [&](size_t i) {
    BifurcationRow& row = rows[i];
    row.omega = omegas[i];
    try {
      const DefectParams p(tau, v, mu, omegas[i]);
      const ExistenceRegime r = regime(p);
      row.count = r.count;
      if (r.count >= 1) {
        row.tilde = branch_tilde(p);
        const FunctionalReport ft = closed_form_report(*row.tilde);
        row.mass_tilde = ft.mass2;
        row.s_reduced_tilde = ft.reduced;
      }
      if (r.count == 2) {
        row.hat = branch_hat(p);
        const FunctionalReport fh = closed_form_report(*row.hat);
        row.mass_hat = fh.mass2;
        row.s_reduced_hat = fh.reduced;
      }
      if (opt.with_verdict && r.count >= 1) {
        try {
          row.verdict = gss_verdict(p).verdict;
        } catch (const error& e) {
          row.note = e.what();
        }
      }
    } catch (const error& e) {
      row.note = e.what();
    }
  };

  int nthreads = opt.threads > 0 ? opt.threads : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::clamp<int>(nthreads, 1, 64);
  if (nthreads == 1 || omegas.size() < 8) {
    for (size_t i = 0; i < omegas.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < omegas.size(); i = next.fetch_add(1)) work(i);
      });
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace ftnls
