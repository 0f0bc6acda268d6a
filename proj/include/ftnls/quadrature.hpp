#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "ftnls/errors.hpp"

namespace ftnls::quad {

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre nodes and weights by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi-style initial guess
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

namespace detail {

inline const GaussRule& cached_rule(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(gauss_legendre(n));
  return *slot;
}

}  // namespace detail

/// Integrate f over [a, b] with an n-point Gauss-Legendre rule.
template <class F>
double gauss_integrate(F&& f, double a, double b, int n) {
  const GaussRule& r = detail::cached_rule(n);
  const double c = 0.5 * (a + b), s = 0.5 * (b - a);
  double acc = 0;
  for (int i = 0; i < n; ++i) acc += r.weights[i] * f(c + s * r.nodes[i]);
  return acc * s;
}

/// Exact value of the complete moment  I(p) = \int_{-1}^{1} (1 - t^2)^p dt
/// = sqrt(pi) Gamma(p+1) / Gamma(p+3/2),   p > -1.
inline double unit_moment_complete(double p) {
  if (!(p > -1.0)) throw invalid_params_error("unit_moment_complete: exponent must exceed -1");
  return std::sqrt(std::numbers::pi) * std::exp(std::lgamma(p + 1.0) - std::lgamma(p + 1.5));
}

namespace detail {

/// Upper tail \int_m^1 (1 - t^2)^p dt for p < 0 through the substitution
/// t = 1 - s^k with k = 1/(p+1), which absorbs the endpoint singularity:
/// the integrand becomes k (2 - s^k)^p with the s^{k(p+1)-1} factor equal
/// to one, so plain Gauss-Legendre doubling converges in a few rounds.
inline double upper_tail_moment(double p, double m) {
  const double k = 1.0 / (p + 1.0);
  const double S = std::pow(1.0 - m, 1.0 / k);
  auto f = [k, p](double s) { return k * std::pow(2.0 - std::pow(s, k), p); };
  double prev = gauss_integrate(f, 0.0, S, 64);
  for (int n = 128; n <= 65536; n *= 2) {
    const double cur = gauss_integrate(f, 0.0, S, n);
    if (std::abs(cur - prev) <= 1e-12 * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace detail

/// Incomplete moment  \int_a^b (1 - t^2)^p dt  with a, b in [-1, 1].
///
/// Substituting t = sin(theta) removes the endpoint singularity order;
/// the cos^{2p+1} integrand is then handled by Gauss-Legendre with
/// doubling until two consecutive refinements agree to 1e-12. Tails that
/// touch +-1 with a genuinely singular integrand (p well below zero) go
/// through the dedicated desingularized form instead.
inline double unit_moment(double p, double a, double b) {
  if (!(p > -1.0)) throw invalid_params_error("unit_moment: exponent must exceed -1");
  if (!(a >= -1.0 && a <= 1.0 && b >= -1.0 && b <= 1.0))
    throw invalid_params_error("unit_moment: limits must lie in [-1, 1]");
  if (a == b) return 0.0;
  if (a == -1.0 && b == 1.0) return unit_moment_complete(p);
  if (a > b) return -unit_moment(p, b, a);
  if (p < -0.2) {
    if (b == 1.0 && a > -1.0) return detail::upper_tail_moment(p, a);
    if (a == -1.0 && b < 1.0) return detail::upper_tail_moment(p, -b);
  }
  const double q = 2.0 * p + 1.0;
  const double ta = std::asin(a), tb = std::asin(b);
  auto f = [q](double theta) { return std::pow(std::cos(theta), q); };
  double prev = gauss_integrate(f, ta, tb, 200);
  for (int n = 400; n <= 409600; n *= 2) {
    const double cur = gauss_integrate(f, ta, tb, n);
    if (std::abs(cur - prev) <= 1e-12 * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;  // best available; doubling cap reached
}

}  // namespace ftnls::quad
