// Umbrella header: Krylov solvers with online error-norm estimation,
// quadrature-style error bounds, seeded test-problem generation, and the
// accuracy benchmark harness.
#pragma once

#include "bicgql/bench.hpp"
#include "bicgql/dense_matrix.hpp"
#include "bicgql/eigen.hpp"
#include "bicgql/errors.hpp"
#include "bicgql/estimators.hpp"
#include "bicgql/lanczos.hpp"
#include "bicgql/linear_operator.hpp"
#include "bicgql/lu.hpp"
#include "bicgql/matrix_gen.hpp"
#include "bicgql/matrix_market.hpp"
#include "bicgql/solvers.hpp"
#include "bicgql/stopping.hpp"
#include "bicgql/trace.hpp"
#include "bicgql/vector_ops.hpp"
