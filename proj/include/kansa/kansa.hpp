#pragma once

// Umbrella header: MultiQuadric Kansa collocation with fictitious centers.

#include "kansa/csv.hpp"
#include "kansa/dense_matrix.hpp"
#include "kansa/discretization.hpp"
#include "kansa/errors.hpp"
#include "kansa/harness.hpp"
#include "kansa/linear_solver.hpp"
#include "kansa/mq_kernel.hpp"
#include "kansa/operators.hpp"
#include "kansa/point.hpp"
#include "kansa/random.hpp"
