#pragma once

// Panel change-point segmentation: weighted CUSUM and group-fused-LASSO
// estimators for common changes across many short panels, covariance-based
// weighting schemes and their estimation, the deterministic consistency
// calculators, and a seeded Monte Carlo benchmark harness.

#include "panelseg/argmax.hpp"
#include "panelseg/config.hpp"
#include "panelseg/convex_regression.hpp"
#include "panelseg/covariance.hpp"
#include "panelseg/csv.hpp"
#include "panelseg/cusum.hpp"
#include "panelseg/errors.hpp"
#include "panelseg/experiments.hpp"
#include "panelseg/gflasso.hpp"
#include "panelseg/panel.hpp"
#include "panelseg/parallel.hpp"
#include "panelseg/rng.hpp"
#include "panelseg/svg.hpp"
#include "panelseg/theory.hpp"
#include "panelseg/version.hpp"
#include "panelseg/weights.hpp"
