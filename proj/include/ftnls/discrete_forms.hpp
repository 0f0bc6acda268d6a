#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "ftnls/banded.hpp"
#include "ftnls/core.hpp"
#include "ftnls/errors.hpp"

namespace ftnls {

/// Discretization of H^1_tau with the jump condition built into the
/// unknowns: the 0+ value is never stored, it is tau times the vertex DOF.
///
/// DOF layout (size m = 2N - 1, homogeneous values at the box ends):
///   [0 .. N-2]   left interior nodes  -L+h .. -h
///   [N-1]        vertex DOF c = u(0-)            (u(0+) = tau c)
///   [N .. 2N-2]  right interior nodes  h .. L-h
///
/// Piecewise-linear elements give the stiffness and defect quadratic form;
/// the mass and power terms use the lumped (trapezoid) weights. With the
/// vertex pair merged this ordering is exactly tridiagonal, and the full
/// quadratic forms equal their trapezoid counterparts on the reconstructed
/// two-sided field.
class JumpReducedSpace {
 public:
  JumpReducedSpace(const HalfLineGrid& grid, double tau) : grid_(grid), tau_(tau), m_(2 * grid.N - 1) {}

  const HalfLineGrid& grid() const { return grid_; }
  double tau() const { return tau_; }
  int size() const { return m_; }
  int vertex_index() const { return grid_.N - 1; }

  /// Lumped L^2 weight of one DOF; the vertex carries both interface nodes.
  double mass_weight(int i) const {
    const double h = grid_.h;
    return i == vertex_index() ? 0.5 * h * (1.0 + tau_ * tau_) : h;
  }

  /// Weight of |y_i|^q in the L^q form (the 0+ copy scales by tau^q).
  double power_weight(int i, double q) const {
    const double h = grid_.h;
    return i == vertex_index() ? 0.5 * h * (1.0 + std::pow(tau_, q)) : h;
  }

  // -- quadratic forms ------------------------------------------------------

  template <class Scalar>
  double kinetic_form(const std::vector<Scalar>& y) const {
    const double h = grid_.h;
    const int nv = vertex_index();
    double s = std::norm(complex(y[0]));  // element touching -L (zero end value)
    for (int i = 0; i < nv; ++i) s += std::norm(complex(y[i + 1] - y[i]));
    s += std::norm(complex(y[nv + 1] - tau_ * y[nv]));  // element [0+, h]
    for (int i = nv + 1; i < m_ - 1; ++i) s += std::norm(complex(y[i + 1] - y[i]));
    s += std::norm(complex(y[m_ - 1]));  // element touching +L
    return s / h;
  }

  template <class Scalar>
  double mass_form(const std::vector<Scalar>& y) const {
    double s = 0;
    for (int i = 0; i < m_; ++i) s += mass_weight(i) * std::norm(complex(y[i]));
    return s;
  }

  template <class Scalar>
  double power_form(const std::vector<Scalar>& y, double mu) const {
    const double q = 2.0 * mu + 2.0;
    double s = 0;
    for (int i = 0; i < m_; ++i) s += power_weight(i, q) * std::pow(std::abs(complex(y[i])), q);
    return s;
  }

  template <class Scalar>
  double defect_form(const std::vector<Scalar>& y) const {
    return std::norm(complex(y[vertex_index()]));
  }

  // -- operators -------------------------------------------------------------

  /// Tridiagonal stiffness matrix of kinetic_form, optionally including the
  /// -v |u(0-)|^2 defect term on the vertex diagonal.
  BandedReal stiffness(double v_defect) const {
    const double h = grid_.h;
    const int nv = vertex_index();
    BandedReal k(m_, 1, 1);
    for (int i = 0; i < m_; ++i) k.at(i, i) = 2.0 / h;
    k.at(nv, nv) = (1.0 + tau_ * tau_) / h - v_defect;
    for (int i = 0; i + 1 < m_; ++i) {
      const double c = (i == nv) ? -tau_ / h : -1.0 / h;  // vertex couples right side through tau
      k.at(i, i + 1) = c;
      k.at(i + 1, i) = c;
    }
    return k;
  }

  /// Gram matrix of the discrete H^1_tau inner product (stiffness + lumped mass).
  BandedReal h1tau_gram() const {
    BandedReal g = stiffness(0.0);
    for (int i = 0; i < m_; ++i) g.at(i, i) += mass_weight(i);
    return g;
  }

  // -- conversions -----------------------------------------------------------

  PiecewiseField to_field(const std::vector<complex>& y) const {
    const int n = grid_.N;
    std::vector<complex> vm(n + 1, complex(0)), vp(n + 1, complex(0));
    for (int j = 1; j < n; ++j) vm[j] = y[j - 1];
    vm[n] = y[vertex_index()];
    vp[0] = tau_ * y[vertex_index()];
    for (int j = 1; j < n; ++j) vp[j] = y[vertex_index() + j];
    return PiecewiseField(grid_, std::move(vm), std::move(vp));
  }

  PiecewiseField to_field_real(const std::vector<double>& y) const {
    std::vector<complex> z(y.begin(), y.end());
    return to_field(z);
  }

  std::vector<complex> from_field(const PiecewiseField& u) const {
    if (u.grid().N != grid_.N) throw grid_error("field grid does not match the reduced space");
    const int n = grid_.N;
    std::vector<complex> y(m_);
    for (int j = 1; j < n; ++j) y[j - 1] = u.values_minus()[j];
    y[vertex_index()] = u.values_minus()[n];
    for (int j = 1; j < n; ++j) y[vertex_index() + j] = u.values_plus()[j];
    return y;
  }

 private:
  HalfLineGrid grid_;
  double tau_;
  int m_;
};

}  // namespace ftnls
