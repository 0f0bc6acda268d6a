#pragma once

// Umbrella header: ground states and orbital stability of the 1D focusing
// NLS with a Fulop-Tsutsui point defect at the origin.

#include "ftnls/banded.hpp"
#include "ftnls/closedform.hpp"
#include "ftnls/core.hpp"
#include "ftnls/discrete_forms.hpp"
#include "ftnls/dynamics.hpp"
#include "ftnls/errors.hpp"
#include "ftnls/functionals.hpp"
#include "ftnls/groundstate.hpp"
#include "ftnls/quadrature.hpp"
#include "ftnls/spectral.hpp"
#include "ftnls/stability.hpp"
#include "ftnls/version.hpp"
