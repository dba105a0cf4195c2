#pragma once

#include <utility>
#include <vector>

#include "ccopt/grid.hpp"
#include "ccopt/linsolve.hpp"

namespace ccopt {

/// Model parameters of the chemotaxis-consumption system
///   d/dt u - Lap u = -div(u grad v),
///   d/dt v - Lap v = -u^s v + f v 1_{mask},
/// with homogeneous Neumann boundaries. `s` is the consumption exponent,
/// `q` the exponent of the space-time regularity monitor ||u^s||_{L^q},
/// `alpha` the shift of the auxiliary variable z = sqrt(v + alpha^2).
struct ModelParams {
    double s = 1.0;
    double alpha = 1e-4;
    double q = 3.0;
};

void validate(const ModelParams& p);

struct TimeGrid {
    double T = 1.0;
    int steps = 1;
    double dt() const { return T / steps; }
};

void validate(const TimeGrid& tg);

using FieldSeries = std::vector<ScalarField>;  // one field per time node

/// States (u, v) at every time node 0..steps.
struct Trajectory {
    TimeGrid time_grid;
    FieldSeries u_series;
    FieldSeries v_series;
};

/// Time-indexed control supported on the mask; values off the mask are kept
/// exactly zero at all nodes. Only nodes 0..steps-1 enter the dynamics and
/// the cost (node `steps` is carried for alignment).
struct ControlField {
    TimeGrid time_grid;
    SubdomainMask mask;
    FieldSeries f_series;
};

ControlField make_control(const TimeGrid& tg, const SubdomainMask& mask,
                          double constant_value = 0.0);

/// Zeroes every off-mask entry (exact).
void apply_mask(ControlField& f);

/// Largest time step for which the explicit upwind chemotaxis update keeps
/// u nonnegative: h_min / (2*dim*max_faces|grad v| + eps).
double cfl_dt(const ScalarField& u, const ScalarField& v, const ModelParams& params);

/// One IMEX step: backward-Euler diffusion, implicit-diagonal consumption
/// u^s (frozen at the current u) and negative control part, explicit positive
/// control part, then explicit upwind chemotaxis flux against the fresh v.
/// The chemical solve comes first so the cell flux uses grad v_next.
std::pair<ScalarField, ScalarField> step_forward(const ScalarField& u, const ScalarField& v,
                                                 const ScalarField& f_node,
                                                 const SubdomainMask& mask,
                                                 const ModelParams& params, double dt,
                                                 const SolverOptions& opts = {});

Trajectory solve_forward(const ScalarField& u0, const ScalarField& v0, const ControlField& f,
                         const ModelParams& params, const TimeGrid& tg,
                         const SolverOptions& opts = {});

/// Upwind chemotaxis flux on faces: flux = u_upwind * g, the upwind cell
/// chosen by the sign of the face value g (ties take the left cell).
VectorField upwind_flux(const ScalarField& u, const VectorField& g);

/// z = sqrt(v + alpha^2), clamping round-off negatives of v at zero so that
/// z >= alpha pointwise. Entries of v below -1e-12 are rejected.
ScalarField z_transform(const ScalarField& v, double alpha);

/// Free energy  (s/4) * int g(u) + (1/2) * int |grad z|^2  with
/// g(u) = (u+1)ln(u+1) - u for s = 1 and u^s/(s(s-1)) for s > 1.
/// Exponents in (1, 1+1e-12) are rejected as ill-conditioned.
double free_energy(const ScalarField& u, const ScalarField& v, const ModelParams& params);

/// Per-node monitor record. Energy-related integrals use the face-dual
/// quadrature (each interior face weighted by one cell volume).
struct DiagnosticsRow {
    double time = 0.0;
    double mass = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    double min_v = 0.0;
    double max_v = 0.0;
    double energy = 0.0;
    double grad_z_sq = 0.0;          // int |grad z|^2
    double us_grad_z_sq = 0.0;       // int u^s |grad z|^2
    double grad_us2_sq = 0.0;        // int |grad (u+1)^{s/2}|^2
    double grad_z4_over_z2 = 0.0;    // int |grad z|^4 / z^2
    double lap_z_sq = 0.0;           // int (Lap z)^2
    double criterion_cum = 0.0;      // ||u^s||_{L^q((0,t) x domain)}
    // running time integrals of the dissipation terms up to this node
    double diss_us_grad_z_cum = 0.0;
    double diss_grad_us2_cum = 0.0;
    double diss_grad_z4_cum = 0.0;
    double diss_lap_z_cum = 0.0;
};

struct DiagnosticsReport {
    std::vector<DiagnosticsRow> rows;
};

DiagnosticsReport diagnostics(const Trajectory& traj, const ControlField& f,
                              const ModelParams& params);

/// Cumulative regularity monitor over the whole run,
/// ||u^s||_{L^q((0,T) x domain)} with the left-endpoint rule in time.
double criterion_norm(const Trajectory& traj, const ModelParams& params);

/// Pointwise u^s with the argument clamped at zero (round-off negatives).
double clamped_pow(double u, double s);

}  // namespace ccopt
