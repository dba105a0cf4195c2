#pragma once

#include <string>

#include "ccopt/cost.hpp"

namespace ccopt {

struct OptimizeOptions {
    int max_iters = 100;
    double armijo_c = 1e-4;       // sufficient-decrease fraction, in (0,1)
    double backtrack_factor = 0.5;
    double initial_step = 1.0;
    double grad_tol = 1e-6;
    double min_step = 1e-12;
};

void validate(const OptimizeOptions& opts);

struct OptimizationIterate {
    int iter = 0;
    double cost = 0.0;
    double residual = 0.0;
    double step = 0.0;       // accepted step taken from this iterate (0 on the last row)
    double step_norm = 0.0;  // L2(Q) norm of the accepted control move
    double criterion = 0.0;  // ||u^s||_{L^q(Q)} of the iterate's trajectory
};

struct OptimizationReport {
    std::vector<OptimizationIterate> iterates;
    ControlField final_control;
    bool converged = false;
    std::string reason;
};

/// Projected stationarity measure ||f - project(f - step*grad)||_{L^2(Q)} / step.
/// Reduces to the gradient L^2(Q) norm in the unconstrained case; zero iff
/// the discrete variational inequality holds at f. Reports use step = 1.
double optimality_residual(const ControlField& f, const ControlField& grad,
                           const ControlConstraints& constraints, double step);

/// Projected gradient descent on the reduced cost f -> J(S(f), f) with Armijo
/// backtracking on the true reduced cost (one forward solve per trial step).
/// Accepted steps satisfy J_new <= J - armijo_c/step * ||f - f_new||^2_{L^2(Q)}.
OptimizationReport projected_gradient_descent(const ScalarField& u0, const ScalarField& v0,
                                              const ControlField& f0, const ModelParams& params,
                                              const CostSpec& spec, const OptimizeOptions& opts,
                                              const SolverOptions& solver = {});

/// Desired states produced by a forward run at a known control, so the
/// tracking terms of the cost vanish at that control by construction.
std::pair<FieldSeries, FieldSeries> make_tracking_problem(const ScalarField& u0,
                                                          const ScalarField& v0,
                                                          const ControlField& f_star,
                                                          const ModelParams& params,
                                                          const TimeGrid& tg,
                                                          const SolverOptions& solver = {});

}  // namespace ccopt
