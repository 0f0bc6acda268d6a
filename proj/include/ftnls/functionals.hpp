#pragma once

#include <cmath>

#include "ftnls/closedform.hpp"
#include "ftnls/core.hpp"
#include "ftnls/errors.hpp"
#include "ftnls/quadrature.hpp"

namespace ftnls {

/// All scalar functionals of one field at one parameter set.
///
/// kinetic = ||u'||_2^2, mass2 = ||u||_2^2, lp = ||u||_{2mu+2}^{2mu+2},
/// defect = |u(0-)|^2, and the derived energies
///   energy = kinetic/2 - lp/(2mu+2) - (v/2) defect
///   action = energy + (omega/2) mass2
///   nehari = kinetic - lp - v defect + omega mass2
///   reduced = mu / (2(mu+1)) lp.
struct FunctionalReport {
  double kinetic = 0;
  double mass2 = 0;
  double lp = 0;
  double defect = 0;
  double energy = 0;
  double action = 0;
  double nehari = 0;
  double reduced = 0;
};

namespace detail {

inline FunctionalReport assemble_report(double kinetic, double mass2, double lp, double defect,
                                        const DefectParams& p) {
  FunctionalReport r;
  r.kinetic = kinetic;
  r.mass2 = mass2;
  r.lp = lp;
  r.defect = defect;
  r.energy = 0.5 * kinetic - lp / (2.0 * p.mu + 2.0) - 0.5 * p.v * defect;
  r.action = r.energy + 0.5 * p.omega * mass2;
  r.nehari = kinetic - lp - p.v * defect + p.omega * mass2;
  r.reduced = p.mu / (2.0 * (p.mu + 1.0)) * lp;
  return r;
}

}  // namespace detail

/// Evaluate every functional by grid quadrature (composite trapezoid per
/// half-line). The derivative samples come from the analytic descriptor
/// when the field carries one, otherwise from finite differences.
inline FunctionalReport evaluate(const PiecewiseField& u, const DefectParams& p) {
  const double h = u.grid().h;
  const auto& vm = u.values_minus();
  const auto& vp = u.values_plus();

  double kinetic;
  if (u.analytic()) {
    const SolitonPair& d = *u.analytic();
    const int n = u.grid().nodes_per_side();
    std::vector<complex> dm(n), dp(n);
    for (int i = 0; i < n; ++i) {
      dm[i] = d.derivative(u.grid().x_minus(i), true);
      dp[i] = d.derivative(u.grid().x_plus(i), false);
    }
    kinetic = detail::trapezoid_sq(dm, h) + detail::trapezoid_sq(dp, h);
  } else {
    kinetic = detail::trapezoid_sq(detail::fd_derivative(vm, h), h) +
              detail::trapezoid_sq(detail::fd_derivative(vp, h), h);
  }

  const double mass2 = detail::trapezoid_sq(vm, h) + detail::trapezoid_sq(vp, h);
  const double q = 2.0 * p.mu + 2.0;
  auto wp = [q](const complex& z) { return std::pow(std::abs(z), q); };
  const double lp = detail::trapezoid(vm, h, wp) + detail::trapezoid(vp, h, wp);
  const double defect = std::norm(u.at0_minus());
  return detail::assemble_report(kinetic, mass2, lp, defect, p);
}

/// The four norm identities of the stationary branches. All four reduce to
/// complete and incomplete moments of (1 - t^2)^{1/mu} and (1 - t^2)^{1/mu - 1}
/// between the branch endpoints:
///   kinetic = c1/2 ( Ic1 - I1 + T+ (1-T+^2)^{1/mu} - T- (1-T-^2)^{1/mu} )
///   mass2   = c0/mu ( Ic0 - I0 )
///   lp      = (mu+1) c1/mu ( Ic1 - I1 )
///   defect  = (mu+1)^{1/mu} omega^{1/mu} (1 - T-^2)^{1/mu}
/// with c1 = (mu+1)^{1/mu} omega^{1/mu + 1/2}, c0 = (mu+1)^{1/mu} omega^{1/mu - 1/2}.
inline FunctionalReport closed_form_report(const StationaryBranch& b) {
  const DefectParams& p = b.params;
  const double inv_mu = 1.0 / p.mu;
  const double amp = std::pow(p.mu + 1.0, inv_mu);
  const double c1 = amp * std::pow(p.omega, inv_mu + 0.5);
  const double c0 = amp * std::pow(p.omega, inv_mu - 0.5);

  // Ic - int_{T-}^{T+} evaluated as the two tail integrals directly; the
  // difference form cancels catastrophically when the endpoints approach
  // the square boundary (tilde branch near the threshold).
  const double tails1 =
      quad::unit_moment(inv_mu, -1.0, b.T_minus) + quad::unit_moment(inv_mu, b.T_plus, 1.0);
  const double tails0 = quad::unit_moment(inv_mu - 1.0, -1.0, b.T_minus) +
                        quad::unit_moment(inv_mu - 1.0, b.T_plus, 1.0);

  const double wp2 = std::pow(1.0 - b.T_plus * b.T_plus, inv_mu);
  const double wm2 = std::pow(1.0 - b.T_minus * b.T_minus, inv_mu);

  const double kinetic = 0.5 * c1 * (tails1 + b.T_plus * wp2 - b.T_minus * wm2);
  const double mass2 = c0 / p.mu * tails0;
  const double lp = (p.mu + 1.0) * c1 / p.mu * tails1;
  const double defect = amp * std::pow(p.omega, inv_mu) * wm2;
  return detail::assemble_report(kinetic, mass2, lp, defect, p);
}

/// Nehari rescaling factor
///   alpha(u) = ( (||u'||^2 - v |u(0-)|^2 + omega ||u||^2) / ||u||_{2mu+2}^{2mu+2} )^{1/2mu};
/// alpha(u) u lies on the Nehari manifold, and alpha(u) < 1 exactly when
/// I_omega(u) < 0.
inline double nehari_scale(const PiecewiseField& u, const DefectParams& p) {
  const FunctionalReport r = evaluate(u, p);
  if (r.lp <= 0.0) throw undefined_scale_error("nehari_scale: zero field has no Nehari rescaling");
  const double num = r.kinetic - p.v * r.defect + p.omega * r.mass2;
  if (num <= 0.0)
    throw coercivity_error("nehari_scale: nonpositive quadratic form (omega at or below the linear threshold?)");
  return std::pow(num / r.lp, 1.0 / (2.0 * p.mu));
}

/// Coercivity constant of the quadratic form
///   ||u'||^2 - v |u(0-)|^2 + omega ||u||^2 >= C ||u||_{H^1_tau}^2,
/// valid for every a in (v/(tau^2+1), omega(tau^2+1)/v) with
/// C(a) = min(1 - v/(a(tau^2+1)), omega - v a/(tau^2+1)). The interval is
/// nonempty exactly above the linear threshold; a is fixed to the geometric
/// mean of the endpoints, a = sqrt(omega).
inline double coercivity_constant(const DefectParams& p) {
  const double s = p.tau * p.tau + 1.0;
  const double lo = p.v / s;
  const double hi = p.omega * s / p.v;
  if (!(lo < hi))
    throw coercivity_error("coercivity_constant: empty parameter interval (omega <= v^2/(tau^2+1)^2)");
  const double a = std::sqrt(lo * hi);  // = sqrt(omega)
  return std::min(1.0 - p.v / (a * s), p.omega - p.v * a / s);
}

}  // namespace ftnls
