#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "ftnls/banded.hpp"
#include "ftnls/closedform.hpp"
#include "ftnls/core.hpp"
#include "ftnls/errors.hpp"

namespace ftnls {

enum class OperatorKind { L1, L2 };

/// Finite-difference realization of the linearization operators around the
/// tilde ground state,
///   L1 a = -a'' + omega a - (2mu+1) |u|^{2mu} a,
///   L2 b = -b'' + omega b -          |u|^{2mu} b,
/// on the domain cut by the vertex conditions u(0+) = tau u(0-),
/// u'(0-) - tau u'(0+) = v u(0-).
///
/// The two vertex conditions are imposed through second-order one-sided
/// stencils and then eliminated: with D = 3(1+tau^2) - 2 h v,
///   u(0-) = (4 u(-h) - u(-2h) + 4 tau u(h) - tau u(2h)) / D,  u(0+) = tau u(0-).
/// Interior rows are the standard 3-point Laplacian plus omega minus the
/// sampled potential; the rows adjacent to the vertex absorb the
/// reconstruction, which makes the reduced matrix mildly non-symmetric with
/// bandwidth 2. Unknowns are the interior nodes of both half-lines
/// (Dirichlet zeros at the box ends), size 2N - 2.
struct LinearizedOperator {
  OperatorKind kind;
  BandedReal matrix;
  std::vector<double> potential_minus;  // sampled (2mu+1)|u|^{2mu} or |u|^{2mu}
  std::vector<double> potential_plus;
  DefectParams params;
  HalfLineGrid grid;
  StationaryBranch state;
  double recon_denom;  // D above

  int reduced_size() const { return 2 * grid.N - 2; }

  /// u(0-) from the four interior neighbors of the vertex.
  double reconstruct_vertex(const std::vector<double>& x) const {
    const int n = grid.N;
    return (4.0 * x[n - 2] - x[n - 3] + 4.0 * params.tau * x[n - 1] - params.tau * x[n]) / recon_denom;
  }

  /// Reduced coordinates of a sampled field (interior nodes only).
  std::vector<double> restrict_field(const PiecewiseField& u) const {
    const int n = grid.N;
    std::vector<double> x(reduced_size());
    for (int j = 1; j < n; ++j) x[j - 1] = u.values_minus()[j].real();
    for (int j = 1; j < n; ++j) x[n - 2 + j] = u.values_plus()[j].real();
    return x;
  }

  /// Full two-sided field from reduced coordinates (vertex values from the
  /// interface reconstruction, zeros at the box ends).
  PiecewiseField reconstruct_field(const std::vector<double>& x) const {
    const int n = grid.N;
    std::vector<complex> vm(n + 1, complex(0)), vp(n + 1, complex(0));
    for (int j = 1; j < n; ++j) vm[j] = x[j - 1];
    for (int j = 1; j < n; ++j) vp[j] = x[n - 2 + j];
    const double u0m = reconstruct_vertex(x);
    vm[n] = u0m;
    vp[0] = params.tau * u0m;
    return PiecewiseField(grid, std::move(vm), std::move(vp));
  }
};

inline LinearizedOperator build_operator(OperatorKind kind, const DefectParams& p, const HalfLineGrid& grid) {
  const StationaryBranch b = branch_tilde(p);
  const double need = std::max(std::abs(b.x_minus), std::abs(b.x_plus)) + 10.0 / std::sqrt(p.omega);
  if (grid.L < need) throw grid_error("build_operator: grid too narrow to resolve the ground state");
  if (grid.N < 64) throw grid_error("build_operator: grid too coarse for the linearization");

  const double h = grid.h;
  const double tau = p.tau;
  const double coeff = (kind == OperatorKind::L1) ? 2.0 * p.mu + 1.0 : 1.0;
  const SolitonPair prof{p.omega, p.mu, b.x_minus, b.x_plus};

  LinearizedOperator op{kind,
                        BandedReal(2 * grid.N - 2, 2, 2),
                        std::vector<double>(grid.N + 1),
                        std::vector<double>(grid.N + 1),
                        p,
                        grid,
                        b,
                        3.0 * (1.0 + tau * tau) - 2.0 * h * p.v};
  if (std::abs(op.recon_denom) < 1e-8 * 3.0 * (1.0 + tau * tau))
    throw config_error("build_operator: singular interface rows (3(1+tau^2) = 2 h v)");

  for (int i = 0; i <= grid.N; ++i) {
    op.potential_minus[i] = coeff * std::pow(std::abs(prof.value(grid.x_minus(i), true)), 2.0 * p.mu);
    op.potential_plus[i] = coeff * std::pow(std::abs(prof.value(grid.x_plus(i), false)), 2.0 * p.mu);
  }

  const int n = grid.N;
  const int m = 2 * n - 2;
  const double ih2 = 1.0 / (h * h);
  auto pot = [&](int idx) {  // potential at reduced index
    return idx < n - 1 ? op.potential_minus[idx + 1] : op.potential_plus[idx - (n - 2)];
  };

  BandedReal& A = op.matrix;
  for (int i = 0; i < m; ++i) A.at(i, i) = 2.0 * ih2 + p.omega - pot(i);
  // plain second differences between same-side neighbors
  for (int i = 0; i + 1 < m; ++i) {
    if (i == n - 2) continue;  // no direct bond across the vertex
    A.at(i, i + 1) += -ih2;
    A.at(i + 1, i) += -ih2;
  }
  // The rows at -h and +h reference the eliminated vertex values through
  //   u(0-) = (4 x[n-2] - x[n-3] + 4 tau x[n-1] - tau x[n]) / D,
  //   u(0+) = tau u(0-),
  // each entering with the stencil weight -1/h^2.
  const double D = op.recon_denom;
  {
    const int r = n - 2;  // node at -h
    A.at(r, r) += -4.0 / D * ih2;
    A.at(r, r - 1) += 1.0 / D * ih2;
    A.at(r, r + 1) += -4.0 * tau / D * ih2;
    A.at(r, r + 2) += tau / D * ih2;
  }
  {
    const int r = n - 1;  // node at +h
    A.at(r, r) += -4.0 * tau * tau / D * ih2;
    A.at(r, r + 1) += tau * tau / D * ih2;
    A.at(r, r - 1) += -4.0 * tau / D * ih2;
    A.at(r, r - 2) += tau / D * ih2;
  }
  return op;
}

/// One spectral summary of a linearized operator: the negative-eigenvalue
/// count, the extremal and near-zero eigenvalues, and how closely the
/// near-zero eigenvector aligns with the ground state.
struct SpectralReport {
  OperatorKind kind;
  int n_negative = 0;
  double lambda_min = 0;
  double lambda_kernel = 0;          // eigenvalue nearest zero
  double kernel_vector_residual = 0; // sine of the angle to the sampled ground state
  double zero_tolerance = 0;         // 10 h^2 omega
  std::vector<double> eigenvalues;   // ascending, lowest <= 10 converged
  std::optional<PiecewiseField> kernel_field;
};

struct SpectralOptions {
  int krylov_dim = 90;
  // Acceptance gate on the true residual ||A x - lambda x||, relative to
  // ||A||_inf. Tight enough that no unconverged Ritz value can enter the
  // negative/kernel counts (the near-shift pairs converge far below it).
  double residual_tol = 1e-10;
  uint64_t seed = 20240901;
  int report_count = 10;
};

namespace detail {

struct RitzPair {
  double lambda;
  std::vector<double> vec;
  double residual;
};

/// Shift-invert Arnoldi: eigenvalues of A nearest sigma, verified against
/// A itself through the true residual ||A x - lambda x||.
inline std::vector<RitzPair> arnoldi_shift_invert(const BandedReal& A, double sigma, const SpectralOptions& opt) {
  const int m = A.size();
  const double anorm = A.inf_norm();
  const double res_tol = opt.residual_tol * std::max(1.0, anorm);

  std::optional<BandedReal::LU> lu;
  double shift = sigma;
  for (int attempt = 0; attempt < 3 && !lu; ++attempt) {
    try {
      BandedReal B = A;
      for (int i = 0; i < m; ++i) B.at(i, i) -= shift;
      lu.emplace(B.factorize());
    } catch (const numerical_error&) {
      shift = sigma + (attempt + 1) * 1e-10 * std::max(1.0, std::abs(sigma));
    }
  }
  if (!lu) throw numerical_error("shift-invert factorization failed near sigma = " + std::to_string(sigma));

  const int kdim = std::min(opt.krylov_dim, m);
  std::vector<std::vector<double>> V;
  V.reserve(kdim + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(kdim + 1, kdim);

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  std::vector<double> v0(m);
  for (double& c : v0) c = gauss(rng);
  double nrm = std::sqrt(std::inner_product(v0.begin(), v0.end(), v0.begin(), 0.0));
  for (double& c : v0) c /= nrm;
  V.push_back(std::move(v0));

  int k_eff = 0;
  for (int j = 0; j < kdim; ++j) {
    std::vector<double> w = lu->solve(V[j]);
    for (int pass = 0; pass < 2; ++pass) {  // MGS, twice for numerical orthogonality
      for (int i = 0; i <= j; ++i) {
        double hij = std::inner_product(w.begin(), w.end(), V[i].begin(), 0.0);
        if (pass == 0)
          H(i, j) = hij;
        else
          H(i, j) += hij;
        for (int t = 0; t < m; ++t) w[t] -= hij * V[i][t];
      }
    }
    const double hw = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    H(j + 1, j) = hw;
    k_eff = j + 1;
    if (hw < 1e-13) break;  // invariant subspace found
    for (double& c : w) c /= hw;
    V.push_back(std::move(w));
  }

  Eigen::MatrixXd Hk = H.topLeftCorner(k_eff, k_eff);
  Eigen::EigenSolver<Eigen::MatrixXd> es(Hk);
  if (es.info() != Eigen::Success)
    throw numerical_error("Hessenberg eigensolve failed", k_eff);

  std::vector<RitzPair> out;
  for (int q = 0; q < k_eff; ++q) {
    const std::complex<double> theta = es.eigenvalues()[q];
    if (std::abs(theta) < 1e-14) continue;
    if (std::abs(theta.imag()) > 1e-8 * std::abs(theta)) continue;  // complex pair: not converged here
    const double lambda = shift + 1.0 / theta.real();
    std::vector<double> x(m, 0.0);
    for (int i = 0; i < k_eff; ++i) {
      const double yi = es.eigenvectors()(i, q).real();
      for (int t = 0; t < m; ++t) x[t] += yi * V[i][t];
    }
    double xn = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    if (xn < 1e-14) continue;
    for (double& c : x) c /= xn;
    std::vector<double> ax(m);
    A.apply(x.data(), ax.data());
    double rr = 0;
    for (int t = 0; t < m; ++t) {
      const double d = ax[t] - lambda * x[t];
      rr += d * d;
    }
    const double res = std::sqrt(rr);
    if (res <= res_tol) out.push_back({lambda, std::move(x), res});
  }
  return out;
}

}  // namespace detail

/// Lowest part of the spectrum by shift-invert iteration at the two shifts
/// {-2 omega, 0}, which bracket the negative cluster and the near-zero
/// cluster of the linearizations. Eigenvalues within 10 h^2 omega of zero
/// count as numerical kernel.
inline SpectralReport spectral_report(const LinearizedOperator& op, const SpectralOptions& opt = {}) {
  std::vector<detail::RitzPair> pairs;
  for (double sigma : {-2.0 * op.params.omega, 0.0}) {
    SpectralOptions o = opt;
    auto part = detail::arnoldi_shift_invert(op.matrix, sigma, o);
    for (auto& pr : part) pairs.push_back(std::move(pr));
  }
  if (pairs.empty())
    throw numerical_error("spectral_report: no converged eigenpairs", opt.krylov_dim);

  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  std::vector<detail::RitzPair> uniq;
  for (auto& pr : pairs) {
    if (!uniq.empty() && std::abs(pr.lambda - uniq.back().lambda) <=
                             1e-7 * std::max(1.0, std::max(std::abs(pr.lambda), std::abs(uniq.back().lambda)))) {
      if (pr.residual < uniq.back().residual) uniq.back() = std::move(pr);
      continue;
    }
    uniq.push_back(std::move(pr));
  }
  if (static_cast<int>(uniq.size()) > opt.report_count) uniq.resize(opt.report_count);

  SpectralReport rep;
  rep.kind = op.kind;
  rep.zero_tolerance = 10.0 * op.grid.h * op.grid.h * op.params.omega;
  rep.lambda_min = uniq.front().lambda;
  size_t kz = 0;
  for (size_t i = 0; i < uniq.size(); ++i) {
    rep.eigenvalues.push_back(uniq[i].lambda);
    if (uniq[i].lambda < -rep.zero_tolerance) ++rep.n_negative;
    if (std::abs(uniq[i].lambda) < std::abs(uniq[kz].lambda)) kz = i;
  }
  rep.lambda_kernel = uniq[kz].lambda;

  // alignment of the near-zero eigenvector with the sampled ground state
  const PiecewiseField uref = build_stationary(op.state, op.grid);
  std::vector<double> ref = op.restrict_field(uref);
  double rn = std::sqrt(std::inner_product(ref.begin(), ref.end(), ref.begin(), 0.0));
  for (double& c : ref) c /= rn;
  const std::vector<double>& kv = uniq[kz].vec;
  const double dot = std::abs(std::inner_product(kv.begin(), kv.end(), ref.begin(), 0.0));
  rep.kernel_vector_residual = std::sqrt(std::max(0.0, 1.0 - dot * dot));
  rep.kernel_field = op.reconstruct_field(uniq[kz].vec);
  return rep;
}

/// Analytic witness that the kernel of L1 is trivial: the matching system
/// would force T-^2 = (tau^{2mu} - 1) / (tau^{2mu} (1 - tau^{2mu+4})),
/// whose right-hand side is negative for every admissible tau.
inline double kernel_obstruction_check(const DefectParams& p) {
  const double t2m = std::pow(p.tau, 2.0 * p.mu);
  const double t2m4 = std::pow(p.tau, 2.0 * p.mu + 4.0);
  return (t2m - 1.0) / (t2m * (1.0 - t2m4));
}

}  // namespace ftnls
