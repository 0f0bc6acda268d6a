#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "ftnls/errors.hpp"

namespace ftnls {

/// General banded matrix with kl subdiagonals and ku superdiagonals,
/// stored in LAPACK band layout with kl extra rows reserved for the
/// fill-in produced by partial pivoting.
///
/// Entry (i, j) lives at ab[(kl + ku + i - j) + j * ld], ld = 2*kl + ku + 1.
template <class Scalar>
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), ld_(2 * kl + ku + 1), ab_(static_cast<size_t>(ld_) * n, Scalar(0)) {}

  int size() const { return n_; }
  int lower_bandwidth() const { return kl_; }
  int upper_bandwidth() const { return ku_; }

  Scalar& at(int i, int j) { return ab_[index(i, j)]; }
  const Scalar& at(int i, int j) const { return ab_[index(i, j)]; }

  bool in_band(int i, int j) const { return i - j <= kl_ && j - i <= ku_; }

  /// y = A x
  void apply(const Scalar* x, Scalar* y) const {
    for (int i = 0; i < n_; ++i) {
      Scalar s(0);
      const int j0 = std::max(0, i - kl_);
      const int j1 = std::min(n_ - 1, i + ku_);
      for (int j = j0; j <= j1; ++j) s += at(i, j) * x[j];
      y[i] = s;
    }
  }

  std::vector<Scalar> apply(const std::vector<Scalar>& x) const {
    std::vector<Scalar> y(n_);
    apply(x.data(), y.data());
    return y;
  }

  double inf_norm() const {
    double m = 0;
    for (int i = 0; i < n_; ++i) {
      double r = 0;
      const int j0 = std::max(0, i - kl_);
      const int j1 = std::min(n_ - 1, i + ku_);
      for (int j = j0; j <= j1; ++j) r += std::abs(at(i, j));
      m = std::max(m, r);
    }
    return m;
  }

  /// LU factorization with partial pivoting, band version of dgbtrf.
  /// The factorization is stored in place (U in the band, multipliers below).
  class LU {
   public:
    LU(BandedMatrix a) : a_(std::move(a)), ipiv_(a_.n_) { factor(); }

    void solve_in_place(Scalar* b) const {
      const int n = a_.n_, kl = a_.kl_, ku = a_.ku_;
      // forward: apply row interchanges and L
      for (int j = 0; j < n - 1; ++j) {
        const int p = ipiv_[j];
        if (p != j) std::swap(b[j], b[p]);
        const int im = std::min(n - 1, j + kl);
        for (int i = j + 1; i <= im; ++i) b[i] -= a_.at(i, j) * b[j];
      }
      // back substitution with U (bandwidth kl+ku after pivoting)
      const int kv = kl + ku;
      for (int i = n - 1; i >= 0; --i) {
        Scalar s = b[i];
        const int j1 = std::min(n - 1, i + kv);
        for (int j = i + 1; j <= j1; ++j) s -= a_.at(i, j) * b[j];
        b[i] = s / a_.at(i, i);
      }
    }

    std::vector<Scalar> solve(std::vector<Scalar> b) const {
      solve_in_place(b.data());
      return b;
    }

   private:
    void factor() {
      const int n = a_.n_, kl = a_.kl_, ku = a_.ku_;
      const int kv = kl + ku;  // effective upper bandwidth of U
      int ju = 0;              // rightmost column touched so far
      for (int j = 0; j < n; ++j) {
        const int km = std::min(kl, n - 1 - j);
        // pivot search in column j
        int jp = j;
        double amax = std::abs(a_.at(j, j));
        for (int i = j + 1; i <= j + km; ++i) {
          const double v = std::abs(a_.at(i, j));
          if (v > amax) {
            amax = v;
            jp = i;
          }
        }
        ipiv_[j] = jp;
        if (amax == 0.0) throw numerical_error("banded LU: exactly singular matrix at column " + std::to_string(j));
        ju = std::max(ju, std::min(j + kv, n - 1));
        if (jp != j) {
          // both rows stay inside the padded band for k in [j, ju]
          for (int k = j; k <= ju; ++k) std::swap(a_.at(j, k), a_.at(jp, k));
        }
        const Scalar piv = a_.at(j, j);
        for (int i = j + 1; i <= j + km; ++i) a_.at(i, j) /= piv;
        for (int k = j + 1; k <= ju; ++k) {
          const Scalar ujk = a_.at(j, k);
          if (ujk != Scalar(0)) {
            for (int i = j + 1; i <= j + km; ++i) a_.at(i, k) -= a_.at(i, j) * ujk;
          }
        }
      }
    }

    BandedMatrix a_;
    std::vector<int> ipiv_;
  };

  LU factorize() const { return LU(*this); }

 private:
  size_t index(int i, int j) const { return static_cast<size_t>(kl_ + ku_ + i - j) + static_cast<size_t>(j) * ld_; }

  int n_, kl_, ku_, ld_;
  std::vector<Scalar> ab_;
};

using BandedReal = BandedMatrix<double>;
using BandedComplex = BandedMatrix<std::complex<double>>;

}  // namespace ftnls
