#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ftnls/errors.hpp"

namespace ftnls {

using complex = std::complex<double>;

/// The defect triple (tau, v, mu) plus the frequency omega.
///
/// tau > 0 and tau != 1: negative tau is equivalent to |tau| up to a sign
/// flip of the wavefunction on one half-line, and tau = 1 degenerates to a
/// plain delta with a continuous state. Both are rejected outright so every
/// downstream formula can assume a single sign regime.
struct DefectParams {
  double tau;
  double v;
  double mu;
  double omega;

  DefectParams(double tau_, double v_, double mu_, double omega_)
      : tau(tau_), v(v_), mu(mu_), omega(omega_) {
    if (!(tau > 0.0))
      throw invalid_params_error("tau must be positive (tau < 0 maps to |tau| by a half-line sign flip; pass the positive value)");
    if (tau == 1.0)
      throw invalid_params_error("tau = 1 is a plain delta interface, outside this model");
    if (!(v > 0.0)) throw invalid_params_error("v must be positive (attractive defect)");
    if (!(mu > 0.0)) throw invalid_params_error("mu must be positive");
    if (!(omega > 0.0)) throw invalid_params_error("omega must be positive");
  }
};

/// Uniform grid on [-L, 0-] and [0+, L]. The origin is represented twice,
/// once as the right end of the left half-line and once as the left end of
/// the right half-line; the two copies are never merged.
struct HalfLineGrid {
  double L;
  int N;  // intervals per half-line; N + 1 nodes per side
  double h;

  HalfLineGrid(double L_, int N_) : L(L_), N(N_), h(L_ / N_) {
    if (!(L > 0.0)) throw grid_error("grid half-width must be positive");
    if (N < 16) throw grid_error("grid too coarse: need at least 16 intervals per half-line");
  }

  int nodes_per_side() const { return N + 1; }
  double x_minus(int i) const { return -L + i * h; }  // i = N is the 0- node
  double x_plus(int i) const { return i * h; }        // i = 0 is the 0+ node

  /// Default truncation for fields at frequency omega and power mu:
  /// L = max(40, 12/sqrt(omega)) * max(1, 1/mu), wide enough that
  /// cosh^{-1/mu}(mu sqrt(omega) x) tails fall below 1e-12.
  static double default_width(double omega, double mu) {
    return std::max(40.0, 12.0 / std::sqrt(omega)) * std::max(1.0, 1.0 / mu);
  }

  static HalfLineGrid for_params(const DefectParams& p, int min_intervals = 4000) {
    const double L = default_width(p.omega, p.mu);
    return with_resolution(p, L, min_intervals);
  }

  /// Grid of width L with spacing fine enough that h times the fastest
  /// integrand decay rate, (2 mu + 2) sqrt(omega) from the |u|^{2mu+2}
  /// term, stays below the given target. The composite-trapezoid error of
  /// the functionals then scales like target^2 / 12.
  static HalfLineGrid with_resolution(const DefectParams& p, double L, int min_intervals = 4000,
                                      double h_scale_target = 2.5e-3) {
    const double rate = (2.0 * p.mu + 2.0) * std::sqrt(p.omega);
    int n = static_cast<int>(std::ceil(L * rate / h_scale_target));
    n = std::clamp(n, min_intervals, 2'000'000);
    return HalfLineGrid(L, n);
  }
};

/// Closed-form descriptor of a field made of two soliton translates:
/// scale * phi_omega(x + x_minus) on the left half-line and
/// scale * phi_omega(x + x_plus) on the right one.
struct SolitonPair {
  double omega;
  double mu;
  double x_minus;
  double x_plus;
  double scale = 1.0;

  // cosh^{-1/mu} evaluated through exponentials to avoid overflow
  static double sech_pow(double z, double inv_mu) {
    const double az = std::abs(z);
    const double e = std::exp(-2.0 * az);
    return std::exp(-az * inv_mu) * std::pow(2.0 / (1.0 + e), inv_mu);
  }

  double amplitude() const { return std::pow(omega * (mu + 1.0), 1.0 / (2.0 * mu)); }

  double value(double x, bool left) const {
    const double shift = left ? x_minus : x_plus;
    return scale * amplitude() * sech_pow(mu * std::sqrt(omega) * (x + shift), 1.0 / mu);
  }

  double derivative(double x, bool left) const {
    const double shift = left ? x_minus : x_plus;
    const double z = mu * std::sqrt(omega) * (x + shift);
    return -std::sqrt(omega) * std::tanh(z) * value(x, left);
  }
};

/// Complex- or real-valued function on R \ {0}, stored as one sampling per
/// half-line plus an optional closed-form descriptor.
class PiecewiseField {
 public:
  PiecewiseField(HalfLineGrid grid, std::vector<complex> values_minus, std::vector<complex> values_plus,
                 std::optional<SolitonPair> analytic = std::nullopt)
      : grid_(grid), vm_(std::move(values_minus)), vp_(std::move(values_plus)), analytic_(analytic) {
    if (static_cast<int>(vm_.size()) != grid_.nodes_per_side() ||
        static_cast<int>(vp_.size()) != grid_.nodes_per_side())
      throw grid_error("field value arrays do not match the grid");
  }

  static PiecewiseField zero(const HalfLineGrid& grid) {
    std::vector<complex> z(grid.nodes_per_side(), complex(0));
    return PiecewiseField(grid, z, z);
  }

  template <class F>
  static PiecewiseField sample(const HalfLineGrid& grid, F&& fn) {
    std::vector<complex> vm(grid.nodes_per_side()), vp(grid.nodes_per_side());
    for (int i = 0; i <= grid.N; ++i) {
      vm[i] = fn(grid.x_minus(i));
      vp[i] = fn(grid.x_plus(i));
    }
    return PiecewiseField(grid, std::move(vm), std::move(vp));
  }

  static PiecewiseField from_analytic(const HalfLineGrid& grid, const SolitonPair& d) {
    std::vector<complex> vm(grid.nodes_per_side()), vp(grid.nodes_per_side());
    for (int i = 0; i <= grid.N; ++i) {
      vm[i] = d.value(grid.x_minus(i), true);
      vp[i] = d.value(grid.x_plus(i), false);
    }
    return PiecewiseField(grid, std::move(vm), std::move(vp), d);
  }

  const HalfLineGrid& grid() const { return grid_; }
  const std::vector<complex>& values_minus() const { return vm_; }
  const std::vector<complex>& values_plus() const { return vp_; }
  std::vector<complex>& values_minus() { return vm_; }
  std::vector<complex>& values_plus() { return vp_; }
  const std::optional<SolitonPair>& analytic() const { return analytic_; }
  void drop_analytic() { analytic_.reset(); }

  complex at0_minus() const { return vm_.back(); }
  complex at0_plus() const { return vp_.front(); }

  PiecewiseField scaled(double c) const {
    PiecewiseField out = *this;
    for (auto& z : out.vm_) z *= c;
    for (auto& z : out.vp_) z *= c;
    if (out.analytic_) out.analytic_->scale *= c;
    return out;
  }

  double max_abs() const {
    double m = 0;
    for (const auto& z : vm_) m = std::max(m, std::abs(z));
    for (const auto& z : vp_) m = std::max(m, std::abs(z));
    return m;
  }

 private:
  HalfLineGrid grid_;
  std::vector<complex> vm_, vp_;
  std::optional<SolitonPair> analytic_;
};

namespace detail {

/// Sampled derivative: centered in the interior, second-order one-sided
/// 3-point stencils at both ends of each half-line. The one-sided stencils
/// keep the two sides of the defect fully decoupled.
inline std::vector<complex> fd_derivative(const std::vector<complex>& f, double h) {
  const int n = static_cast<int>(f.size());
  if (n < 3) throw grid_error("grid too coarse for derivative stencils (need 3 nodes per side)");
  std::vector<complex> d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (int i = 1; i < n - 1; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

template <class F>
double trapezoid(const std::vector<complex>& f, double h, F&& weight) {
  const int n = static_cast<int>(f.size());
  double s = 0.5 * (weight(f[0]) + weight(f[n - 1]));
  for (int i = 1; i < n - 1; ++i) s += weight(f[i]);
  return s * h;
}

inline double trapezoid_sq(const std::vector<complex>& f, double h) {
  return trapezoid(f, h, [](const complex& z) { return std::norm(z); });
}

}  // namespace detail

/// Residuals of the two vertex conditions u(0+) = tau u(0-) and
/// u'(0-) - tau u'(0+) = v u(0-). Both vanish for operator-domain
/// functions; only the first is required for energy-space membership.
inline std::pair<double, double> vertex_residual(const PiecewiseField& u, const DefectParams& p) {
  const auto& vm = u.values_minus();
  const auto& vp = u.values_plus();
  if (vm.size() < 3 || vp.size() < 3)
    throw grid_error("grid too coarse for vertex residual (need 3 nodes per side)");
  const complex u0m = u.at0_minus();
  const complex u0p = u.at0_plus();
  complex dm, dp;
  if (u.analytic()) {
    dm = u.analytic()->derivative(0.0, true);
    dp = u.analytic()->derivative(0.0, false);
  } else {
    const double h = u.grid().h;
    const size_t n = vm.size();
    dm = (3.0 * vm[n - 1] - 4.0 * vm[n - 2] + vm[n - 3]) / (2.0 * h);
    dp = (-3.0 * vp[0] + 4.0 * vp[1] - vp[2]) / (2.0 * h);
  }
  const double jump = std::abs(u0p - p.tau * u0m);
  const double flux = std::abs(dm - p.tau * dp - p.v * u0m);
  return {jump, flux};
}

/// || u ||_{H^1_tau} = sqrt( ||u||_2^2 + ||u'||_{2,-}^2 + ||u'||_{2,+}^2 ),
/// derivatives by finite differences, integrals by composite trapezoid
/// with the interface endpoint counted once per side.
inline double h1tau_norm(const PiecewiseField& u) {
  const double h = u.grid().h;
  const auto dm = detail::fd_derivative(u.values_minus(), h);
  const auto dp = detail::fd_derivative(u.values_plus(), h);
  const double mass = detail::trapezoid_sq(u.values_minus(), h) + detail::trapezoid_sq(u.values_plus(), h);
  const double kin = detail::trapezoid_sq(dm, h) + detail::trapezoid_sq(dp, h);
  return std::sqrt(mass + kin);
}

/// Natural H^1_tau inner product <u, w> = \int u conj(w) + \int u' conj(w'),
/// with the same discretization conventions as h1tau_norm.
inline complex h1tau_inner(const PiecewiseField& u, const PiecewiseField& w) {
  if (u.grid().N != w.grid().N || u.grid().L != w.grid().L)
    throw grid_error("h1tau_inner: fields live on different grids");
  const double h = u.grid().h;
  const auto dum = detail::fd_derivative(u.values_minus(), h);
  const auto dup = detail::fd_derivative(u.values_plus(), h);
  const auto dwm = detail::fd_derivative(w.values_minus(), h);
  const auto dwp = detail::fd_derivative(w.values_plus(), h);
  auto dot = [h](const std::vector<complex>& a, const std::vector<complex>& b) {
    const int n = static_cast<int>(a.size());
    complex s = 0.5 * (a[0] * std::conj(b[0]) + a[n - 1] * std::conj(b[n - 1]));
    for (int i = 1; i < n - 1; ++i) s += a[i] * std::conj(b[i]);
    return s * h;
  };
  return dot(u.values_minus(), w.values_minus()) + dot(u.values_plus(), w.values_plus()) + dot(dum, dwm) +
         dot(dup, dwp);
}

}  // namespace ftnls
