#ifndef VRPROX_VRPROX_HPP
#define VRPROX_VRPROX_HPP

#include "vrprox/diagnostics.hpp"
#include "vrprox/estimators.hpp"
#include "vrprox/fstar.hpp"
#include "vrprox/problem.hpp"
#include "vrprox/prox.hpp"
#include "vrprox/rng.hpp"
#include "vrprox/sampling.hpp"
#include "vrprox/schedules.hpp"
#include "vrprox/solvers.hpp"

#endif  // VRPROX_VRPROX_HPP
