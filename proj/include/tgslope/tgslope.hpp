#pragma once

// Umbrella header: group-SLOPE penalized low-rank tensor regression.

#include "tgslope/core.hpp"
#include "tgslope/tensor.hpp"
#include "tgslope/random.hpp"
#include "tgslope/linalg.hpp"
#include "tgslope/penalty.hpp"
#include "tgslope/solver.hpp"
#include "tgslope/metrics.hpp"
#include "tgslope/experiments.hpp"
#include "tgslope/io.hpp"
