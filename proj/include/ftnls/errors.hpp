#pragma once

#include <stdexcept>
#include <string>

namespace ftnls {

/// Base class for all errors thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected problem parameters (tau/v/mu/omega outside the admissible set).
class invalid_params_error : public error {
 public:
  using error::error;
};

/// Grid construction or resolution problems (too coarse, too narrow, ...).
class grid_error : public error {
 public:
  using error::error;
};

/// No stationary state exists at the requested frequency.
/// Carries both thresholds so callers can print the admissible interval.
class no_solution_error : public error {
 public:
  no_solution_error(const std::string& msg, double omega_star, double omega_dstar)
      : error(msg), omega_star_(omega_star), omega_dstar_(omega_dstar) {}
  double omega_star() const { return omega_star_; }
  double omega_dstar() const { return omega_dstar_; }

 private:
  double omega_star_;
  double omega_dstar_;
};

/// Nehari rescaling of the zero field is undefined.
class undefined_scale_error : public error {
 public:
  using error::error;
};

/// The quadratic form is not coercive at these parameters (omega at or
/// below the linear threshold); also used for the empty a-interval case.
class coercivity_error : public error {
 public:
  using error::error;
};

/// Finite-difference stencil in omega would cross the existence threshold.
class threshold_proximity_error : public error {
 public:
  using error::error;
};

/// An iterative numerical procedure failed to converge.
class numerical_error : public error {
 public:
  explicit numerical_error(const std::string& msg, int iterations = -1)
      : error(msg), iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

/// Invalid run configuration (bad solver setup, singular interface rows, ...).
class config_error : public error {
 public:
  using error::error;
};

}  // namespace ftnls
