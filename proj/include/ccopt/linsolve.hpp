#pragma once

#include "ccopt/grid.hpp"

namespace ccopt {

/// Linear solver controls. The relative residual tolerance defaults tight
/// enough that solver noise stays far below every invariant checked on top
/// of the solutions (mass budgets, transpose identities, difference-quotient
/// oracles). Iteration cap is 10 times the cell count.
struct SolverOptions {
    double rel_tol = 1e-12;
};

/// Solves (I - dt*Lap + dt*diag(react)) x = rhs by conjugate gradients on the
/// matrix-free stencil operator. `react` may be null for a zero diagonal;
/// entries must satisfy 1 + dt*react > 0 so the operator stays positive
/// definite. Throws SolverError on non-convergence.
ScalarField helmholtz_solve(const ScalarField& rhs, double dt, const ScalarField* react,
                            const SolverOptions& opts);

}  // namespace ccopt
