#pragma once

#include <cmath>
#include <string>

#include "ftnls/core.hpp"
#include "ftnls/errors.hpp"

namespace ftnls {

/// Free-line soliton profile phi_omega(x) = (omega(mu+1))^{1/2mu} cosh^{-1/mu}(mu sqrt(omega) x).
inline double soliton(double omega, double mu, double x) {
  if (!(omega > 0.0) || !(mu > 0.0)) throw invalid_params_error("soliton: omega and mu must be positive");
  return std::pow(omega * (mu + 1.0), 1.0 / (2.0 * mu)) *
         SolitonPair::sech_pow(mu * std::sqrt(omega) * x, 1.0 / mu);
}

inline double soliton_derivative(double omega, double mu, double x) {
  const double z = mu * std::sqrt(omega) * x;
  return -std::sqrt(omega) * std::tanh(z) * soliton(omega, mu, x);
}

/// Frequency of the linear bound state in H^1_tau: omega = v^2 / (tau^2 + 1)^2.
inline double linear_threshold(const DefectParams& p) {
  const double d = p.tau * p.tau + 1.0;
  return p.v * p.v / (d * d);
}

enum class BranchLabel { Tilde, Hat };

/// One solution (T-, T+, x-, x+) of the vertex matching system, with
/// T_pm = tanh(mu sqrt(omega) x_pm) constrained to the open unit square.
struct StationaryBranch {
  BranchLabel label;
  double T_minus;
  double T_plus;
  double x_minus;
  double x_plus;
  DefectParams params;
};

/// Existence thresholds and branch count at a given frequency:
/// no branches for omega <= omega_star, one on (omega_star, omega_dstar],
/// two above omega_dstar.
struct ExistenceRegime {
  double omega_star;   // v^2 / (tau^2 + 1)^2
  double omega_dstar;  // v^2 / (tau^2 - 1)^2
  int count;
};

inline ExistenceRegime regime(const DefectParams& p) {
  const double s = p.tau * p.tau + 1.0;
  const double d = p.tau * p.tau - 1.0;
  ExistenceRegime r;
  r.omega_star = p.v * p.v / (s * s);
  r.omega_dstar = p.v * p.v / (d * d);
  if (p.omega <= r.omega_star)
    r.count = 0;
  else if (p.omega <= r.omega_dstar)
    r.count = 1;
  else
    r.count = 2;
  return r;
}

namespace detail {

/// A(omega) = (v^2/omega) tau^{2mu} + (tau^{2mu+4} - 1)(tau^{2mu} - 1),
/// evaluated factor-wise: for tau < 1 both bracket factors are negative and
/// their product must be formed before any rounding can flip the sign.
inline double branch_discriminant(const DefectParams& p) {
  const double t2m = std::pow(p.tau, 2.0 * p.mu);
  const double t2m4 = std::pow(p.tau, 2.0 * p.mu + 4.0);
  const double a = (p.v * p.v / p.omega) * t2m + (t2m4 - 1.0) * (t2m - 1.0);
  if (!(a >= 0.0)) throw numerical_error("branch discriminant went negative: A = " + std::to_string(a));
  return a;
}

inline double atanh_log(double t) {
  // log1p form of arctanh, stable as |t| -> 1
  return 0.5 * (std::log1p(t) - std::log1p(-t));
}

inline void check_system_residual(const StationaryBranch& b) {
  const auto& p = b.params;
  const double t2m = std::pow(p.tau, 2.0 * p.mu);
  const double line = p.tau * p.tau * b.T_plus - b.T_minus - p.v / std::sqrt(p.omega);
  const double h1 = b.T_minus * b.T_minus / (1.0 - 1.0 / t2m);
  const double h2 = b.T_plus * b.T_plus / (t2m - 1.0);
  const double hyp = h1 - h2 - 1.0;
  const double scale = std::max({1.0, std::abs(h1), std::abs(h2)});
  if (std::abs(line) > 1e-12 * std::max(1.0, p.v / std::sqrt(p.omega)) || std::abs(hyp) > 1e-12 * scale)
    throw numerical_error("constructed branch violates the matching system");
}

inline StationaryBranch make_branch(BranchLabel label, const DefectParams& p, double root_sign) {
  const double denom = std::pow(p.tau, 2.0 * p.mu + 4.0) - 1.0;
  const double vs = p.v / std::sqrt(p.omega);
  const double sq = std::sqrt(branch_discriminant(p));
  const double tm = (vs + root_sign * p.tau * p.tau * sq) / denom;
  const double tp = (std::pow(p.tau, 2.0 * p.mu + 2.0) * vs + root_sign * sq) / denom;
  if (!(std::abs(tm) < 1.0 && std::abs(tp) < 1.0))
    throw numerical_error("branch solution left the open unit square");
  const double rate = p.mu * std::sqrt(p.omega);
  StationaryBranch b{label, tm, tp, atanh_log(tm) / rate, atanh_log(tp) / rate, p};
  check_system_residual(b);
  return b;
}

}  // namespace detail

/// Tilde branch, defined for every omega above the linear threshold.
inline StationaryBranch branch_tilde(const DefectParams& p) {
  const ExistenceRegime r = regime(p);
  if (r.count == 0)
    throw no_solution_error("no stationary state: omega = " + std::to_string(p.omega) +
                                " is at or below the existence threshold " + std::to_string(r.omega_star),
                            r.omega_star, r.omega_dstar);
  return detail::make_branch(BranchLabel::Tilde, p, -1.0);
}

/// Hat branch, defined only above the second threshold.
inline StationaryBranch branch_hat(const DefectParams& p) {
  const ExistenceRegime r = regime(p);
  if (r.count < 2)
    throw no_solution_error("no hat-branch state: omega = " + std::to_string(p.omega) +
                                " is at or below the second threshold " + std::to_string(r.omega_dstar),
                            r.omega_star, r.omega_dstar);
  return detail::make_branch(BranchLabel::Hat, p, +1.0);
}

/// Sufficient half-width for sampling a branch state with tails below 1e-12.
inline double branch_width(const StationaryBranch& b) {
  const double base = HalfLineGrid::default_width(b.params.omega, b.params.mu);
  // soliton tails decay like exp(-sqrt(omega) |x|); 28 e-foldings past the
  // farthest translate keeps the truncated amplitude below 1e-12
  const double reach = std::max(std::abs(b.x_minus), std::abs(b.x_plus)) + 28.0 / std::sqrt(b.params.omega);
  return std::max(base, reach);
}

inline HalfLineGrid grid_for_branch(const StationaryBranch& b, int min_intervals = 4000,
                                    double h_scale_target = 2.5e-3) {
  return HalfLineGrid::with_resolution(b.params, branch_width(b), min_intervals, h_scale_target);
}

/// Sample the stationary state u(x) = phi_omega(x + x_-) on R_- and
/// phi_omega(x + x_+) on R_+, carrying the analytic descriptor.
inline PiecewiseField build_stationary(const StationaryBranch& b, const HalfLineGrid& grid) {
  const double need = std::max(std::abs(b.x_minus), std::abs(b.x_plus)) + 10.0 / std::sqrt(b.params.omega);
  if (grid.L < need)
    throw grid_error("grid too narrow for this stationary state: need L >= " + std::to_string(need));
  return PiecewiseField::from_analytic(grid, SolitonPair{b.params.omega, b.params.mu, b.x_minus, b.x_plus});
}

/// The v = 0 comparison state (two soliton translates matched through the
/// jump condition alone). It is the v -> 0 limit of the tilde branch; the
/// zero-defect matching system fixes tanh(mu sqrt(omega) x_+)^2 =
/// (1 - tau^{2mu}) / (1 - tau^{2mu+4}) and x_- = tau^2-scaled accordingly.
inline StationaryBranch dipole_branch(const DefectParams& p) {
  const double t2m = std::pow(p.tau, 2.0 * p.mu);
  const double t2m4 = std::pow(p.tau, 2.0 * p.mu + 4.0);
  const double denom = t2m4 - 1.0;
  const double a0 = (t2m4 - 1.0) * (t2m - 1.0);  // both factors share a sign
  const double sq = std::sqrt(a0);
  const double tm = -p.tau * p.tau * sq / denom;
  const double tp = -sq / denom;
  const double rate = p.mu * std::sqrt(p.omega);
  StationaryBranch b{BranchLabel::Tilde, tm, tp, detail::atanh_log(tm) / rate, detail::atanh_log(tp) / rate, p};
  return b;
}

inline PiecewiseField dipole_state(const DefectParams& p, const HalfLineGrid& grid) {
  const StationaryBranch b = dipole_branch(p);
  return PiecewiseField::from_analytic(grid, SolitonPair{p.omega, p.mu, b.x_minus, b.x_plus});
}

}  // namespace ftnls
