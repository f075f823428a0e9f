#pragma once

#include "aggregators.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "experiments.hpp"
#include "grouping.hpp"
#include "linalg.hpp"
#include "maximin.hpp"
#include "nnls.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sim.hpp"
#include "simplex_qp.hpp"
