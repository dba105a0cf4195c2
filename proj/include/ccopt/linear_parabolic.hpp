#pragma once

#include <utility>
#include <vector>

#include "ccopt/forward.hpp"

namespace ccopt {

/// Coefficients of the general linear parabolic pair
///   d/dt U - Lap U + a1 U + b1 V + div(U c1) + div(d grad V) = gU,
///   d/dt V - Lap V + a2 V + b2 U + c2 . grad V            = gV,
/// with zero initial data and Neumann boundaries. All series are aligned to
/// one time grid (one entry per node); step n reads node n. The vector
/// coefficients live on faces with zero boundary entries.
struct LinearCoefficients {
    FieldSeries a1, b1, a2, b2, d;
    std::vector<VectorField> c1, c2;
};

/// One implicit-diffusion / explicit-coupling step per time node, sharing the
/// flux and upwind discretizations of the forward scheme: the V stage solves
/// (I - dt*Lap + dt*a2) V_{n+1} = V_n + dt(-b2 U_n - c2.grad V_n + gV_n),
/// then the U stage solves
/// (I - dt*Lap) U_{n+1} = U_n + dt(-a1 U_n - b1 V_{n+1}
///                        - div(upwind(U_n) c1 + d_face grad V_{n+1}) + gU_n),
/// with d averaged onto faces. Superposition holds exactly up to solver
/// tolerance. dt must respect the upwind bound for |c1|.
std::pair<FieldSeries, FieldSeries> solve_general_linear(const LinearCoefficients& coeffs,
                                                         const FieldSeries& gU,
                                                         const FieldSeries& gV,
                                                         const TimeGrid& tg,
                                                         const SolverOptions& opts = {});

/// Multiplier pair of the transposed (backward-in-time) system; the terminal
/// node is identically zero.
struct AdjointPair {
    TimeGrid time_grid;
    FieldSeries lambda_series;
    FieldSeries eta_series;
};

/// Exact derivative of the discrete flow map at the base trajectory in the
/// control direction F: every step of the forward scheme is differentiated
/// as executed, with the upwind selections and the control sign pattern
/// frozen at the base. Returns the state perturbation series (U, V) with
/// zero node 0.
std::pair<FieldSeries, FieldSeries> solve_tangent(const Trajectory& traj,
                                                  const ControlField& f,
                                                  const ModelParams& params,
                                                  const ControlField& F,
                                                  const SolverOptions& opts = {});

/// Tangent system driven by general state sources instead of a control
/// direction: dt*gU_n and dt*gV_n are added to the step-n equations.
std::pair<FieldSeries, FieldSeries> solve_tangent_sources(const Trajectory& traj,
                                                          const ControlField& f,
                                                          const ModelParams& params,
                                                          const FieldSeries& gU,
                                                          const FieldSeries& gV,
                                                          const SolverOptions& opts = {});

/// Algebraic transpose of solve_tangent: backward sweep whose output pairs
/// exactly with any tangent solution,
///   sum_{n=1..N} dt ( <U_n, g_lambda_n> + <V_n, g_eta_n> )
///     = sum_{n=0..N-1} dt <F_n, coupling_n * eta_n>,
/// where coupling_n is the bilinear control coupling returned by
/// bilinear_coupling_field. Sources at node 0 are ignored (the tangent has
/// zero initial data); the terminal multipliers are exactly zero.
AdjointPair solve_adjoint(const Trajectory& traj, const ControlField& f,
                          const ModelParams& params, const FieldSeries& g_lambda,
                          const FieldSeries& g_eta, const SolverOptions& opts = {});

/// Derivative of the step-n chemical update with respect to the control:
/// mask * (v_n on cells with f_n >= 0, v_{n+1} where f_n < 0). The split
/// follows the positive/negative control treatment of the forward scheme.
ScalarField bilinear_coupling_field(const Trajectory& traj, const ControlField& f, int node);

/// Space-time pairing of a state perturbation with source fields,
/// right-endpoint rule: sum_{n=1..N} dt <U_n, a_n> + dt <V_n, b_n>.
double state_pairing(const FieldSeries& U, const FieldSeries& V, const FieldSeries& a,
                     const FieldSeries& b, double dt);

/// Space-time pairing of two control-shaped series, left-endpoint rule:
/// sum_{n=0..N-1} dt <a_n, b_n>.
double control_pairing(const FieldSeries& a, const FieldSeries& b, double dt);

/// Relative discrepancy of the duality identity between the tangent applied
/// to F and the adjoint pullback of (w_lambda, w_eta); zero when both sides
/// vanish.
double transpose_check(const Trajectory& traj, const ControlField& f,
                       const ModelParams& params, const ControlField& F,
                       const FieldSeries& w_lambda, const FieldSeries& w_eta,
                       const SolverOptions& opts = {});

}  // namespace ccopt
