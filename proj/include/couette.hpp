#pragma once

#include "couette/errors.hpp"
#include "couette/spectral_domain.hpp"
#include "couette/linear_oracle.hpp"
#include "couette/quadrature.hpp"
#include "couette/multiplier_weights.hpp"
#include "couette/ns_solver.hpp"
#include "couette/initial_data.hpp"
#include "couette/checkpoint.hpp"
#include "couette/toy_model.hpp"
#include "couette/diagnostics.hpp"
#include "couette/run_config.hpp"
#include "couette/sweep_harness.hpp"
