#include "ccopt/linsolve.hpp"

#include <cmath>

namespace ccopt {

namespace {

// y = (I - dt*Lap + dt*diag(react)) x
void apply_operator(const ScalarField& x, double dt, const ScalarField* react,
                    ScalarField& y) {
    const Grid& g = x.grid;
    std::int64_t idx = 0;
    for (int i2 = 0; i2 < g.cells[2]; ++i2)
        for (int i1 = 0; i1 < g.cells[1]; ++i1)
            for (int i0 = 0; i0 < g.cells[0]; ++i0, ++idx) {
                const int ii[3] = {i0, i1, i2};
                double lap = 0.0;
                for (int k = 0; k < g.dim; ++k) {
                    const double h = g.spacing[k];
                    const std::int64_t s = g.stride[k];
                    double flux_r = (ii[k] + 1 < g.cells[k]) ? (x[idx + s] - x[idx]) / h : 0.0;
                    double flux_l = (ii[k] > 0) ? (x[idx] - x[idx - s]) / h : 0.0;
                    lap += (flux_r - flux_l) / h;
                }
                double d = react ? (*react)[idx] : 0.0;
                y[idx] = x[idx] - dt * lap + dt * d * x[idx];
            }
}

double plain_dot(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return s;
}

}  // namespace

ScalarField helmholtz_solve(const ScalarField& rhs, double dt, const ScalarField* react,
                            const SolverOptions& opts) {
    const Grid& g = rhs.grid;
    if (react) {
        for (double d : react->values)
            if (!(1.0 + dt * d > 0.0))
                throw SolverError("helmholtz_solve: operator not positive definite "
                                  "(1 + dt*react <= 0)");
    }

    ScalarField x(g, 0.0);
    ScalarField r = rhs;               // r = b - A*0
    ScalarField p = r;
    ScalarField ap(g);

    const double b_norm2 = plain_dot(rhs, rhs);
    if (b_norm2 == 0.0) return x;
    const double stop2 = opts.rel_tol * opts.rel_tol * b_norm2;

    double r2 = b_norm2;
    const std::int64_t max_iters = 10 * g.total;
    for (std::int64_t it = 0; it < max_iters; ++it) {
        if (r2 <= stop2) return x;
        apply_operator(p, dt, react, ap);
        const double p_ap = plain_dot(p, ap);
        if (!(p_ap > 0.0))
            throw SolverError("helmholtz_solve: conjugate gradient breakdown",
                              std::sqrt(r2 / b_norm2));
        const double alpha = r2 / p_ap;
        for (std::size_t i = 0; i < x.values.size(); ++i) {
            x.values[i] += alpha * p.values[i];
            r.values[i] -= alpha * ap.values[i];
        }
        const double r2_new = plain_dot(r, r);
        const double beta = r2_new / r2;
        for (std::size_t i = 0; i < p.values.size(); ++i)
            p.values[i] = r.values[i] + beta * p.values[i];
        r2 = r2_new;
    }
    if (r2 <= stop2) return x;
    throw SolverError("helmholtz_solve: no convergence within iteration budget",
                      std::sqrt(r2 / b_norm2));
}

}  // namespace ccopt
