#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <vector>

#include "ftnls/banded.hpp"
#include "ftnls/core.hpp"
#include "ftnls/discrete_forms.hpp"
#include "ftnls/errors.hpp"

namespace ftnls {

enum class Scheme { CrankNicolsonRelaxation };

struct EvolutionConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  Scheme scheme = Scheme::CrankNicolsonRelaxation;
  int snapshot_stride = 100;

  void validate() const {
    if (!(dt > 0.0)) throw config_error("dt must be positive");
    if (!(t_final >= dt)) throw config_error("t_final must be at least dt");
    if (snapshot_stride < 1) throw config_error("snapshot_stride must be >= 1");
  }
};

/// Per-snapshot diagnostics of one trajectory. Drifts are relative to the
/// initial values; orbital_distance is inf over the global phase of the
/// H^1_tau distance to the reference orbit (empty without a reference).
struct TrajectoryReport {
  std::vector<double> times;
  std::vector<double> mass_drift;
  std::vector<double> energy_drift;
  std::vector<double> orbital_distance;
  bool blown_up = false;
  double blowup_time = 0;
};

/// Relaxation Crank-Nicolson integrator for
///   i u_t = -u'' (with the vertex conditions) - |u|^{2mu} u.
///
/// The nonlinearity enters through the lagged auxiliary variable
///   Phi^{n+1/2} = 2 |u^n|^{2mu} - Phi^{n-1/2},
/// and each step solves the Cayley system
///   (i W - dt/2 (K - P)) u^{n+1} = (i W + dt/2 (K - P)) u^n
/// on the jump-reduced tridiagonal space (K = stiffness + defect, W lumped
/// weights, P the Phi-weighted potential). K - P is symmetric and real, so
/// the step is W-unitary and the discrete mass u*Wu (equal to the
/// trapezoid mass of the reconstructed two-sided field) is conserved to
/// solver roundoff.
class Evolution {
 public:
  Evolution(const PiecewiseField& u0, const DefectParams& p, const EvolutionConfig& cfg)
      : params_(p), cfg_(cfg), space_(u0.grid(), p.tau), stiffness_(space_.stiffness(p.v)), time_(0.0) {
    cfg_.validate();
    const double scale = std::max(u0.max_abs(), 1e-300);
    const double jump = std::abs(u0.at0_plus() - p.tau * u0.at0_minus());
    if (jump > 1e-6 * scale)
      throw config_error("initial datum violates the jump condition u(0+) = tau u(0-)");
    z_ = space_.from_field(u0);
    const int m = space_.size();
    phi_.resize(m);
    for (int i = 0; i < m; ++i) phi_[i] = std::pow(std::norm(z_[i]), p.mu);
    initial_max_ = scale;
  }

  double time() const { return time_; }
  const JumpReducedSpace& space() const { return space_; }
  bool blown_up() const { return blown_up_; }

  double mass() const { return space_.mass_form(z_); }

  /// Scheme-consistent discrete energy (kinetic + defect + power terms in
  /// the same quadratic forms the integrator uses).
  double energy() const {
    const double q = 2.0 * params_.mu + 2.0;
    return 0.5 * space_.kinetic_form(z_) - space_.power_form(z_, params_.mu) / q -
           0.5 * params_.v * space_.defect_form(z_);
  }

  PiecewiseField state() const { return space_.to_field(z_); }

  /// Advance one time step. Returns false once a blow-up is detected (the
  /// state is left at the last finite value).
  bool step() {
    if (blown_up_) return false;
    const int m = space_.size();
    const double dt = cfg_.dt;
    const double mu = params_.mu;
    const double q = 2.0 * mu + 2.0;

    // relaxation update of the auxiliary potential
    for (int i = 0; i < m; ++i) phi_[i] = 2.0 * std::pow(std::norm(z_[i]), mu) - phi_[i];

    const BandedReal& k = stiffness_;
    BandedComplex lhs(m, 1, 1);
    std::vector<complex> rhs(m);
    const complex iw(0.0, 1.0);
    // S = K - P with P_i = power_weight(i) * Phi_i on the diagonal
    for (int i = 0; i < m; ++i) {
      const double sii = k.at(i, i) - space_.power_weight(i, q) * phi_[i];
      lhs.at(i, i) = iw * space_.mass_weight(i) - 0.5 * dt * sii;
      complex acc = (iw * space_.mass_weight(i) + 0.5 * dt * sii) * z_[i];
      if (i > 0) {
        lhs.at(i, i - 1) = -0.5 * dt * k.at(i, i - 1);
        acc += 0.5 * dt * k.at(i, i - 1) * z_[i - 1];
      }
      if (i + 1 < m) {
        lhs.at(i, i + 1) = -0.5 * dt * k.at(i, i + 1);
        acc += 0.5 * dt * k.at(i, i + 1) * z_[i + 1];
      }
      rhs[i] = acc;
    }

    try {
      auto lu = lhs.factorize();
      lu.solve_in_place(rhs.data());
    } catch (const numerical_error&) {
      throw config_error("time step failed: singular interface/solver rows");
    }
    z_.swap(rhs);
    time_ += dt;

    double mx = 0;
    bool finite = true;
    for (const complex& c : z_) {
      const double a = std::norm(c);
      if (!std::isfinite(a)) {
        finite = false;
        break;
      }
      mx = std::max(mx, a);
    }
    if (!finite || std::sqrt(mx) > 1e6 * initial_max_) {
      blown_up_ = true;
      return false;
    }
    return true;
  }

 private:
  DefectParams params_;
  EvolutionConfig cfg_;
  JumpReducedSpace space_;
  BandedReal stiffness_;
  std::vector<complex> z_;
  std::vector<double> phi_;
  double time_;
  double initial_max_ = 1.0;
  bool blown_up_ = false;
};

/// One step of the scheme as a pure function on fields.
inline PiecewiseField step(const PiecewiseField& u, const DefectParams& p, const EvolutionConfig& cfg) {
  Evolution ev(u, p, cfg);
  ev.step();
  return ev.state();
}

/// inf over theta of || u - e^{i theta} r ||_{H^1_tau}; the optimal phase is
/// the argument of the H^1_tau inner product.
inline double orbital_distance(const PiecewiseField& u, const PiecewiseField& r) {
  const double nu2 = std::pow(h1tau_norm(u), 2);
  const double nr2 = std::pow(h1tau_norm(r), 2);
  const double ip = std::abs(h1tau_inner(u, r));
  return std::sqrt(std::max(0.0, nu2 + nr2 - 2.0 * ip));
}

/// Evolve u0 to t_final collecting snapshot diagnostics every stride steps.
/// A blow-up (non-finite values or max-norm growth beyond 1e6 x initial)
/// truncates the report and sets the flag.
inline TrajectoryReport evolve(const PiecewiseField& u0, const DefectParams& p, const EvolutionConfig& cfg,
                               std::optional<PiecewiseField> reference = std::nullopt) {
  Evolution ev(u0, p, cfg);
  TrajectoryReport rep;

  const double mass0 = ev.mass();
  const double energy0 = ev.energy();
  auto push_snapshot = [&](double t) {
    rep.times.push_back(t);
    rep.mass_drift.push_back(mass0 > 0 ? std::abs(ev.mass() - mass0) / mass0 : 0.0);
    rep.energy_drift.push_back(std::abs(ev.energy() - energy0) / std::max(std::abs(energy0), 1e-300));
    if (reference) rep.orbital_distance.push_back(orbital_distance(ev.state(), *reference));
  };
  push_snapshot(0.0);

  const long nsteps = static_cast<long>(std::llround(cfg.t_final / cfg.dt));
  for (long k = 1; k <= nsteps; ++k) {
    if (!ev.step()) {
      rep.blown_up = true;
      rep.blowup_time = ev.time();
      break;
    }
    if (k % cfg.snapshot_stride == 0 || k == nsteps) push_snapshot(ev.time());
  }
  return rep;
}

/// Multiplicative perturbation by a random smooth real bump mixture on each
/// half-line, with the 0+ value overwritten to tau times the 0- value so the
/// result stays in the jump space. Reproducible from the seed.
inline PiecewiseField perturb_field(const PiecewiseField& u, const DefectParams& p, double amplitude,
                                    uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), width(0.5, 3.0), center(1.0, 10.0);
  struct Bump {
    double a, c, s;
  };
  std::vector<Bump> left, right;
  for (int k = 0; k < 6; ++k) left.push_back({coef(rng), -center(rng), width(rng)});
  for (int k = 0; k < 6; ++k) right.push_back({coef(rng), center(rng), width(rng)});
  auto mix = [](const std::vector<Bump>& bumps, double x) {
    double s = 0;
    for (const auto& b : bumps) s += b.a * std::exp(-(x - b.c) * (x - b.c) / (2.0 * b.s * b.s));
    return s;
  };
  double peak = 1e-300;
  const HalfLineGrid& g = u.grid();
  for (int i = 0; i <= g.N; ++i) {
    peak = std::max(peak, std::abs(mix(left, g.x_minus(i))));
    peak = std::max(peak, std::abs(mix(right, g.x_plus(i))));
  }
  PiecewiseField out = u;
  out.drop_analytic();
  for (int i = 0; i <= g.N; ++i) {
    out.values_minus()[i] *= 1.0 + amplitude * mix(left, g.x_minus(i)) / peak;
    out.values_plus()[i] *= 1.0 + amplitude * mix(right, g.x_plus(i)) / peak;
  }
  out.values_plus()[0] = p.tau * out.values_minus().back();
  return out;
}

}  // namespace ftnls
