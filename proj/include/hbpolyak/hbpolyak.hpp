#pragma once

#include "hbpolyak/errors.hpp"
#include "hbpolyak/krylov_oracle.hpp"
#include "hbpolyak/polynomial_view.hpp"
#include "hbpolyak/q_polynomial.hpp"
#include "hbpolyak/quadratic_problem.hpp"
#include "hbpolyak/solvers.hpp"
