#pragma once

#include <utility>

#include "ccopt/linear_parabolic.hpp"

namespace ccopt {

struct ControlConstraints {
    enum class Kind { unconstrained, box };
    Kind kind = Kind::unconstrained;
    double f_min = 0.0;
    double f_max = 0.0;
};

void validate(const ControlConstraints& c);

/// Tracking cost
///   J = gamma_u/(s q) int |u - u_d|^{sq} + gamma_v/2 int |v - v_d|^2
///     + gamma_f/q int_{mask} |f|^q
/// over the space-time cylinder. State terms use the right-endpoint rule in
/// time (nodes 1..N; node 0 is fixed by the initial data), the control term
/// the left-endpoint rule (nodes 0..N-1), matching the pairing conventions
/// of the tangent/adjoint solvers.
struct CostSpec {
    double gamma_u = 1.0;
    double gamma_v = 0.0;
    double gamma_f = 0.0;
    double s = 1.0;
    double q = 3.0;
    FieldSeries u_d;
    FieldSeries v_d;
    ControlConstraints constraints;
};

void validate(const CostSpec& spec);

double evaluate_cost(const Trajectory& traj, const ControlField& f, const CostSpec& spec);

/// sgn(x) |x|^r with sgn(0) = 0; odd and monotone. Requires r > 0.
double signed_power(double x, double r);

/// Sources of the multiplier system:
///   g_lambda = gamma_u sgn(u - u_d) |u - u_d|^{sq-1},
///   g_eta    = gamma_v (v - v_d),
/// evaluated pointwise at every node.
std::pair<FieldSeries, FieldSeries> adjoint_sources(const Trajectory& traj,
                                                    const CostSpec& spec);

/// Reduced-cost gradient on the control space: at node n < N
///   gamma_f sgn(f) |f|^{q-1} + coupling_n * eta_n   on the mask,
/// zero off the mask and at node N. With the exact-transpose adjoint this is
/// the exact derivative of f -> J(S(f), f).
ControlField control_gradient(const ControlField& f, const Trajectory& traj,
                              const AdjointPair& adj, const CostSpec& spec);

/// Pointwise stationarity inverse: f = -sgn(eta) (v |eta| / gamma_f)^{1/(q-1)}
/// on the mask, using the same chemical level selection as control_gradient
/// (v_n where eta_n <= 0, v_{n+1} where eta_n > 0), so that feeding the
/// result back into control_gradient with the same fields vanishes to
/// round-off.
ControlField explicit_control(const FieldSeries& v_series, const FieldSeries& eta_series,
                              double gamma_f, double q, const SubdomainMask& mask,
                              const TimeGrid& tg);

/// Pointwise clamp onto the box (identity when unconstrained); off-mask
/// entries stay exactly zero. Idempotent.
ControlField project_control(const ControlField& f, const ControlConstraints& constraints);

/// L^2 norm over the control space-time cylinder (left-endpoint rule).
double control_l2_norm(const ControlField& f);

}  // namespace ccopt
