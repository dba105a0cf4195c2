#include "ccopt/optimize.hpp"

#include <cmath>

namespace ccopt {

void validate(const OptimizeOptions& opts) {
    if (opts.max_iters < 0) throw ConfigError("optimize: max_iters must be >= 0");
    if (!(opts.armijo_c > 0.0 && opts.armijo_c < 1.0))
        throw ConfigError("optimize: armijo_c must lie in (0,1)");
    if (!(opts.backtrack_factor > 0.0 && opts.backtrack_factor < 1.0))
        throw ConfigError("optimize: backtrack_factor must lie in (0,1)");
    if (!(opts.initial_step > 0.0)) throw ConfigError("optimize: initial_step must be > 0");
    if (!(opts.grad_tol > 0.0)) throw ConfigError("optimize: grad_tol must be > 0");
    if (!(opts.min_step >= 0.0)) throw ConfigError("optimize: min_step must be >= 0");
}

double optimality_residual(const ControlField& f, const ControlField& grad,
                           const ControlConstraints& constraints, double step) {
    if (!(step > 0.0)) throw ConfigError("optimality_residual: step must be > 0");
    ControlField trial = f;
    for (std::size_t n = 0; n < trial.f_series.size(); ++n)
        for (std::size_t i = 0; i < trial.f_series[n].values.size(); ++i)
            trial.f_series[n].values[i] -= step * grad.f_series[n].values[i];
    trial = project_control(trial, constraints);

    ControlField diff = f;
    for (std::size_t n = 0; n < diff.f_series.size(); ++n)
        for (std::size_t i = 0; i < diff.f_series[n].values.size(); ++i)
            diff.f_series[n].values[i] -= trial.f_series[n].values[i];
    return control_l2_norm(diff) / step;
}

std::pair<FieldSeries, FieldSeries> make_tracking_problem(const ScalarField& u0,
                                                          const ScalarField& v0,
                                                          const ControlField& f_star,
                                                          const ModelParams& params,
                                                          const TimeGrid& tg,
                                                          const SolverOptions& solver) {
    Trajectory traj = solve_forward(u0, v0, f_star, params, tg, solver);
    return {std::move(traj.u_series), std::move(traj.v_series)};
}

OptimizationReport projected_gradient_descent(const ScalarField& u0, const ScalarField& v0,
                                              const ControlField& f0, const ModelParams& params,
                                              const CostSpec& spec, const OptimizeOptions& opts,
                                              const SolverOptions& solver) {
    validate(opts);
    validate(spec);

    OptimizationReport report;
    ControlField f = project_control(f0, spec.constraints);
    Trajectory traj = solve_forward(u0, v0, f, params, f.time_grid, solver);
    double J = evaluate_cost(traj, f, spec);

    for (int k = 0;; ++k) {
        auto [g_lambda, g_eta] = adjoint_sources(traj, spec);
        AdjointPair adj = solve_adjoint(traj, f, params, g_lambda, g_eta, solver);
        ControlField grad = control_gradient(f, traj, adj, spec);
        const double residual = optimality_residual(f, grad, spec.constraints, 1.0);

        OptimizationIterate rec;
        rec.iter = k;
        rec.cost = J;
        rec.residual = residual;
        rec.criterion = criterion_norm(traj, params);
        report.iterates.push_back(rec);

        if (residual <= opts.grad_tol) {
            report.converged = true;
            report.reason = "optimality residual below tolerance";
            break;
        }
        if (k >= opts.max_iters) {
            report.reason = "iteration limit reached";
            break;
        }

        // Armijo backtracking on the true reduced cost
        bool accepted = false;
        double tau = opts.initial_step;
        while (tau >= opts.min_step) {
            ControlField trial = f;
            for (std::size_t n = 0; n < trial.f_series.size(); ++n)
                for (std::size_t i = 0; i < trial.f_series[n].values.size(); ++i)
                    trial.f_series[n].values[i] -= tau * grad.f_series[n].values[i];
            trial = project_control(trial, spec.constraints);

            ControlField diff = f;
            for (std::size_t n = 0; n < diff.f_series.size(); ++n)
                for (std::size_t i = 0; i < diff.f_series[n].values.size(); ++i)
                    diff.f_series[n].values[i] -= trial.f_series[n].values[i];
            const double step_norm = control_l2_norm(diff);
            if (step_norm == 0.0) break;  // projection pins f; nothing to try

            Trajectory traj_trial;
            double J_trial;
            try {
                traj_trial = solve_forward(u0, v0, trial, params, trial.time_grid, solver);
                J_trial = evaluate_cost(traj_trial, trial, spec);
            } catch (const CflError&) {
                tau *= opts.backtrack_factor;  // step left the stable regime; shrink
                continue;
            }

            if (J_trial <= J - opts.armijo_c / tau * step_norm * step_norm) {
                report.iterates.back().step = tau;
                report.iterates.back().step_norm = step_norm;
                f = std::move(trial);
                traj = std::move(traj_trial);
                J = J_trial;
                accepted = true;
                break;
            }
            tau *= opts.backtrack_factor;
        }
        if (!accepted) {
            report.reason = "line search reached the minimal step";
            break;
        }
    }

    report.final_control = std::move(f);
    return report;
}

}  // namespace ccopt
