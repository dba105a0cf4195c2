#include "ccopt/linear_parabolic.hpp"

#include <algorithm>
#include <cmath>

namespace ccopt {

namespace {

// Per-step frozen data of the linearized flow. With the base states
// (u_n, v_n, v_{n+1}), base control f_n and direction F_n, one step reads
//
//   (I - dt*Lap + dt*react_v) V_{n+1} = V_n + dt( e_v V_n + c_vu U_n + src_V ),
//   (I - dt*Lap) U_{n+1} = U_n - dt*div( upwind(U_n, adv) + d_face grad V_{n+1} ) + dt*src_U,
//
// where react_v = u_n^s + f_n^-, e_v = f_n^+, c_vu = -s u_n^{s-1} v_{n+1},
// adv = grad v_{n+1} (branch frozen by its sign) and d_face the base u_n
// upwinded by the same pattern.
struct StepData {
    ScalarField react_v;   // implicit diagonal of the V solve
    ScalarField e_v;       // explicit diagonal on V_n
    ScalarField c_vu;      // coupling applied to U_n in the V equation
    ScalarField coupling;  // control-to-V coupling (bilinear_coupling_field)
    VectorField adv;       // advecting face field, also the upwind pattern
    VectorField d_face;    // face coefficient of the grad V_{n+1} flux
};

StepData build_step(const Trajectory& traj, const ControlField& f, const ModelParams& params,
                    int n) {
    const Grid& g = traj.u_series.front().grid;
    const ScalarField& u_n = traj.u_series[static_cast<std::size_t>(n)];
    const ScalarField& v_n = traj.v_series[static_cast<std::size_t>(n)];
    const ScalarField& v_np1 = traj.v_series[static_cast<std::size_t>(n) + 1];
    const ScalarField& f_n = f.f_series[static_cast<std::size_t>(n)];

    StepData sd;
    sd.react_v = ScalarField(g);
    sd.e_v = ScalarField(g);
    sd.c_vu = ScalarField(g);
    sd.coupling = ScalarField(g);
    for (std::int64_t i = 0; i < g.total; ++i) {
        const double m = f.mask.indicator[static_cast<std::size_t>(i)];
        const double fv = f_n[i] * m;
        sd.react_v[i] = clamped_pow(u_n[i], params.s) + std::max(-fv, 0.0);
        sd.e_v[i] = std::max(fv, 0.0);
        sd.c_vu[i] = -params.s * clamped_pow(u_n[i], params.s - 1.0) * v_np1[i];
        sd.coupling[i] = m * ((fv >= 0.0) ? v_n[i] : v_np1[i]);
    }
    sd.adv = face_gradient(v_np1);

    // base u on faces, selected by the frozen upwind branch (left at ties)
    sd.d_face = VectorField(g);
    for (int k = 0; k < g.dim; ++k) {
        auto fd = face_dims(g, k);
        const std::int64_t s = g.stride[k];
        std::int64_t fi = 0;
        for (int j2 = 0; j2 < fd[2]; ++j2)
            for (int j1 = 0; j1 < fd[1]; ++j1)
                for (int j0 = 0; j0 < fd[0]; ++j0, ++fi) {
                    const int jj[3] = {j0, j1, j2};
                    if (jj[k] == 0 || jj[k] == g.cells[k]) continue;
                    const std::int64_t right =
                        jj[0] * g.stride[0] + jj[1] * g.stride[1] + jj[2] * g.stride[2];
                    const double gv = sd.adv.face[k][static_cast<std::size_t>(fi)];
                    sd.d_face.face[k][static_cast<std::size_t>(fi)] =
                        (gv >= 0.0) ? u_n[right - s] : u_n[right];
                }
    }
    return sd;
}

// faces <- cells: value of the upwind cell (pattern of `adv`) times adv.
VectorField upwind_apply(const ScalarField& U, const VectorField& adv) {
    const Grid& g = U.grid;
    VectorField out(g);
    for (int k = 0; k < g.dim; ++k) {
        auto fd = face_dims(g, k);
        const std::int64_t s = g.stride[k];
        std::int64_t fi = 0;
        for (int j2 = 0; j2 < fd[2]; ++j2)
            for (int j1 = 0; j1 < fd[1]; ++j1)
                for (int j0 = 0; j0 < fd[0]; ++j0, ++fi) {
                    const int jj[3] = {j0, j1, j2};
                    if (jj[k] == 0 || jj[k] == g.cells[k]) continue;
                    const double a = adv.face[k][static_cast<std::size_t>(fi)];
                    if (a == 0.0) continue;
                    const std::int64_t right =
                        jj[0] * g.stride[0] + jj[1] * g.stride[1] + jj[2] * g.stride[2];
                    out.face[k][static_cast<std::size_t>(fi)] =
                        a * ((a >= 0.0) ? U[right - s] : U[right]);
                }
    }
    return out;
}

// cells <- faces: exact transpose of U -> -div(upwind_apply(U, adv)); every
// interior face accumulates adv * (w_R - w_L)/h into its upwind cell.
ScalarField upwind_div_transpose(const VectorField& adv, const ScalarField& w) {
    const Grid& g = w.grid;
    ScalarField out(g);
    for (int k = 0; k < g.dim; ++k) {
        auto fd = face_dims(g, k);
        const double h = g.spacing[k];
        const std::int64_t s = g.stride[k];
        std::int64_t fi = 0;
        for (int j2 = 0; j2 < fd[2]; ++j2)
            for (int j1 = 0; j1 < fd[1]; ++j1)
                for (int j0 = 0; j0 < fd[0]; ++j0, ++fi) {
                    const int jj[3] = {j0, j1, j2};
                    if (jj[k] == 0 || jj[k] == g.cells[k]) continue;
                    const double a = adv.face[k][static_cast<std::size_t>(fi)];
                    if (a == 0.0) continue;
                    const std::int64_t right =
                        jj[0] * g.stride[0] + jj[1] * g.stride[1] + jj[2] * g.stride[2];
                    const std::int64_t left = right - s;
                    const std::int64_t upw = (a >= 0.0) ? left : right;
                    out[upw] += a * (w[right] - w[left]) / h;
                }
    }
    return out;
}

void check_alignment(const Trajectory& traj, const ControlField& f, const ModelParams& params) {
    validate(params);
    const auto nodes = static_cast<std::size_t>(traj.time_grid.steps) + 1;
    if (traj.u_series.size() != nodes || traj.v_series.size() != nodes)
        throw ConfigError("trajectory series length does not match its time grid");
    if (f.time_grid.steps != traj.time_grid.steps || f.time_grid.T != traj.time_grid.T)
        throw ConfigError("control not aligned with the trajectory time grid");
    if (f.f_series.size() != nodes)
        throw ConfigError("control series length does not match the time grid");
    if (!same_grid(traj.u_series.front().grid, f.mask.grid))
        throw ConfigError("control mask grid does not match the trajectory grid");
}

void check_cfl_faces(const VectorField& adv, double dt, int step) {
    const Grid& g = adv.grid;
    double m = 0.0;
    for (int k = 0; k < g.dim; ++k)
        for (double v : adv.face[k]) m = std::max(m, std::abs(v));
    const double bound = g.min_spacing() / (2.0 * g.dim * m + 1e-30);
    if (dt > bound)
        throw CflError("linear step " + std::to_string(step) +
                           " exceeds the upwind positivity bound",
                       bound);
}

// shared stepper for the tangent system with per-step sources
std::pair<FieldSeries, FieldSeries> run_tangent(const Trajectory& traj, const ControlField& f,
                                                const ModelParams& params,
                                                const FieldSeries* srcU, const FieldSeries* srcV,
                                                const SolverOptions& opts) {
    check_alignment(traj, f, params);
    const Grid& g = traj.u_series.front().grid;
    const TimeGrid& tg = traj.time_grid;
    const double dt = tg.dt();

    FieldSeries U, V;
    U.reserve(tg.steps + 1);
    V.reserve(tg.steps + 1);
    U.emplace_back(g, 0.0);
    V.emplace_back(g, 0.0);

    for (int n = 0; n < tg.steps; ++n) {
        StepData sd = build_step(traj, f, params, n);
        check_cfl_faces(sd.adv, dt, n);

        ScalarField rhs_v(g);
        for (std::int64_t i = 0; i < g.total; ++i)
            rhs_v[i] = V[n][i] + dt * (sd.e_v[i] * V[n][i] + sd.c_vu[i] * U[n][i]);
        if (srcV)
            for (std::int64_t i = 0; i < g.total; ++i)
                rhs_v[i] += dt * (*srcV)[static_cast<std::size_t>(n)][i];
        ScalarField V_next = helmholtz_solve(rhs_v, dt, &sd.react_v, opts);

        VectorField flux = upwind_apply(U[static_cast<std::size_t>(n)], sd.adv);
        VectorField gv = face_gradient(V_next);
        for (int k = 0; k < g.dim; ++k)
            for (std::size_t i = 0; i < flux.face[k].size(); ++i)
                flux.face[k][i] += sd.d_face.face[k][i] * gv.face[k][i];
        ScalarField div = div_face_flux(flux);
        ScalarField rhs_u(g);
        for (std::int64_t i = 0; i < g.total; ++i)
            rhs_u[i] = U[static_cast<std::size_t>(n)][i] - dt * div[i];
        if (srcU)
            for (std::int64_t i = 0; i < g.total; ++i)
                rhs_u[i] += dt * (*srcU)[static_cast<std::size_t>(n)][i];
        ScalarField U_next = helmholtz_solve(rhs_u, dt, nullptr, opts);

        U.push_back(std::move(U_next));
        V.push_back(std::move(V_next));
    }
    return {std::move(U), std::move(V)};
}

}  // namespace

ScalarField bilinear_coupling_field(const Trajectory& traj, const ControlField& f, int node) {
    const Grid& g = traj.u_series.front().grid;
    const ScalarField& v_n = traj.v_series[static_cast<std::size_t>(node)];
    const ScalarField& v_np1 = traj.v_series[static_cast<std::size_t>(node) + 1];
    const ScalarField& f_n = f.f_series[static_cast<std::size_t>(node)];
    ScalarField c(g);
    for (std::int64_t i = 0; i < g.total; ++i) {
        const double m = f.mask.indicator[static_cast<std::size_t>(i)];
        c[i] = m * ((f_n[i] * m >= 0.0) ? v_n[i] : v_np1[i]);
    }
    return c;
}

std::pair<FieldSeries, FieldSeries> solve_tangent(const Trajectory& traj, const ControlField& f,
                                                  const ModelParams& params,
                                                  const ControlField& F,
                                                  const SolverOptions& opts) {
    check_alignment(traj, F, params);
    const TimeGrid& tg = traj.time_grid;
    FieldSeries srcV;
    srcV.reserve(tg.steps);
    for (int n = 0; n < tg.steps; ++n) {
        ScalarField c = bilinear_coupling_field(traj, f, n);
        const ScalarField& F_n = F.f_series[static_cast<std::size_t>(n)];
        for (std::int64_t i = 0; i < c.grid.total; ++i) c[i] *= F_n[i];
        srcV.push_back(std::move(c));
    }
    return run_tangent(traj, f, params, nullptr, &srcV, opts);
}

std::pair<FieldSeries, FieldSeries> solve_tangent_sources(const Trajectory& traj,
                                                          const ControlField& f,
                                                          const ModelParams& params,
                                                          const FieldSeries& gU,
                                                          const FieldSeries& gV,
                                                          const SolverOptions& opts) {
    if (gU.size() < static_cast<std::size_t>(traj.time_grid.steps) ||
        gV.size() < static_cast<std::size_t>(traj.time_grid.steps))
        throw ConfigError("solve_tangent_sources: source series too short");
    return run_tangent(traj, f, params, &gU, &gV, opts);
}

AdjointPair solve_adjoint(const Trajectory& traj, const ControlField& f,
                          const ModelParams& params, const FieldSeries& g_lambda,
                          const FieldSeries& g_eta, const SolverOptions& opts) {
    check_alignment(traj, f, params);
    const Grid& g = traj.u_series.front().grid;
    const TimeGrid& tg = traj.time_grid;
    const int N = tg.steps;
    const double dt = tg.dt();
    const auto nodes = static_cast<std::size_t>(N) + 1;
    if (g_lambda.size() != nodes || g_eta.size() != nodes)
        throw ConfigError("solve_adjoint: source series must have one field per node");

    AdjointPair adj;
    adj.time_grid = tg;
    adj.lambda_series.assign(nodes, ScalarField(g, 0.0));
    adj.eta_series.assign(nodes, ScalarField(g, 0.0));

    // Backward sweep. Multiplier node n pairs with the equations of step n;
    // node N is identically zero. The lambda stage inverts the U solve of
    // step n, picking up the frozen advection transpose and the consumption
    // coupling of step n+1; the eta stage then inverts the V solve of step n,
    // picking up the cross flux of step n through the fresh lambda.
    StepData sd_next;  // step n+1 data, reused from the previous sweep iteration
    for (int n = N - 1; n >= 0; --n) {
        StepData sd_n = build_step(traj, f, params, n);
        check_cfl_faces(sd_n.adv, dt, n);
        const ScalarField& lam_next = adj.lambda_series[static_cast<std::size_t>(n) + 1];
        const ScalarField& eta_next = adj.eta_series[static_cast<std::size_t>(n) + 1];

        ScalarField rhs_l(g);
        for (std::int64_t i = 0; i < g.total; ++i)
            rhs_l[i] = lam_next[i] + dt * g_lambda[static_cast<std::size_t>(n) + 1][i];
        if (n + 1 < N) {
            ScalarField advT = upwind_div_transpose(sd_next.adv, lam_next);
            for (std::int64_t i = 0; i < g.total; ++i)
                rhs_l[i] += dt * (advT[i] + sd_next.c_vu[i] * eta_next[i]);
        }
        ScalarField lam = helmholtz_solve(rhs_l, dt, nullptr, opts);

        VectorField gl = face_gradient(lam);
        for (int k = 0; k < g.dim; ++k)
            for (std::size_t i = 0; i < gl.face[k].size(); ++i)
                gl.face[k][i] *= sd_n.d_face.face[k][i];
        ScalarField cross = div_face_flux(gl);
        ScalarField rhs_e(g);
        for (std::int64_t i = 0; i < g.total; ++i)
            rhs_e[i] = eta_next[i] - dt * cross[i] +
                       dt * g_eta[static_cast<std::size_t>(n) + 1][i];
        if (n + 1 < N) {
            for (std::int64_t i = 0; i < g.total; ++i)
                rhs_e[i] += dt * sd_next.e_v[i] * eta_next[i];
        }
        ScalarField eta = helmholtz_solve(rhs_e, dt, &sd_n.react_v, opts);

        adj.lambda_series[static_cast<std::size_t>(n)] = std::move(lam);
        adj.eta_series[static_cast<std::size_t>(n)] = std::move(eta);
        sd_next = std::move(sd_n);
    }
    return adj;
}

double state_pairing(const FieldSeries& U, const FieldSeries& V, const FieldSeries& a,
                     const FieldSeries& b, double dt) {
    double s = 0.0;
    for (std::size_t n = 1; n < U.size(); ++n) s += dt * (dot(U[n], a[n]) + dot(V[n], b[n]));
    return s;
}

double control_pairing(const FieldSeries& x, const FieldSeries& y, double dt) {
    double s = 0.0;
    for (std::size_t n = 0; n + 1 < x.size(); ++n) s += dt * dot(x[n], y[n]);
    return s;
}

double transpose_check(const Trajectory& traj, const ControlField& f,
                       const ModelParams& params, const ControlField& F,
                       const FieldSeries& w_lambda, const FieldSeries& w_eta,
                       const SolverOptions& opts) {
    const double dt = traj.time_grid.dt();
    auto [U, V] = solve_tangent(traj, f, params, F, opts);
    const double lhs = state_pairing(U, V, w_lambda, w_eta, dt);

    AdjointPair adj = solve_adjoint(traj, f, params, w_lambda, w_eta, opts);
    FieldSeries pullback;
    pullback.reserve(F.f_series.size());
    for (int n = 0; n < traj.time_grid.steps; ++n) {
        ScalarField c = bilinear_coupling_field(traj, f, n);
        const ScalarField& eta = adj.eta_series[static_cast<std::size_t>(n)];
        for (std::int64_t i = 0; i < c.grid.total; ++i) c[i] *= eta[i];
        pullback.push_back(std::move(c));
    }
    pullback.emplace_back(traj.u_series.front().grid, 0.0);
    const double rhs = control_pairing(F.f_series, pullback, dt);

    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (scale == 0.0) return 0.0;
    return std::abs(lhs - rhs) / scale;
}

std::pair<FieldSeries, FieldSeries> solve_general_linear(const LinearCoefficients& coeffs,
                                                         const FieldSeries& gU,
                                                         const FieldSeries& gV,
                                                         const TimeGrid& tg,
                                                         const SolverOptions& opts) {
    validate(tg);
    const int N = tg.steps;
    const double dt = tg.dt();
    auto need = [&](const FieldSeries& s, const char* what) {
        if (s.size() < static_cast<std::size_t>(N))
            throw ConfigError(std::string("solve_general_linear: series too short: ") + what);
    };
    need(coeffs.a1, "a1");
    need(coeffs.b1, "b1");
    need(coeffs.a2, "a2");
    need(coeffs.b2, "b2");
    need(coeffs.d, "d");
    need(gU, "gU");
    need(gV, "gV");
    if (coeffs.c1.size() < static_cast<std::size_t>(N) ||
        coeffs.c2.size() < static_cast<std::size_t>(N))
        throw ConfigError("solve_general_linear: series too short: c1/c2");

    const Grid& g = gU.front().grid;
    FieldSeries U, V;
    U.reserve(N + 1);
    V.reserve(N + 1);
    U.emplace_back(g, 0.0);
    V.emplace_back(g, 0.0);

    for (int n = 0; n < N; ++n) {
        const auto un = static_cast<std::size_t>(n);
        check_cfl_faces(coeffs.c1[un], dt, n);

        // V stage: advection c2.grad V_n evaluated at cells by face averaging
        VectorField gvn = face_gradient(V[un]);
        ScalarField c2gv(g);
        for (int k = 0; k < g.dim; ++k) {
            auto fd = face_dims(g, k);
            std::int64_t fi = 0;
            for (int j2 = 0; j2 < fd[2]; ++j2)
                for (int j1 = 0; j1 < fd[1]; ++j1)
                    for (int j0 = 0; j0 < fd[0]; ++j0, ++fi) {
                        const int jj[3] = {j0, j1, j2};
                        if (jj[k] == 0 || jj[k] == g.cells[k]) continue;
                        const double prod = coeffs.c2[un].face[k][static_cast<std::size_t>(fi)] *
                                            gvn.face[k][static_cast<std::size_t>(fi)];
                        if (prod == 0.0) continue;
                        const std::int64_t right =
                            jj[0] * g.stride[0] + jj[1] * g.stride[1] + jj[2] * g.stride[2];
                        c2gv[right] += 0.5 * prod;
                        c2gv[right - g.stride[k]] += 0.5 * prod;
                    }
        }
        ScalarField rhs_v(g);
        for (std::int64_t i = 0; i < g.total; ++i)
            rhs_v[i] = V[un][i] + dt * (-coeffs.b2[un][i] * U[un][i] - c2gv[i] + gV[un][i]);
        ScalarField V_next = helmholtz_solve(rhs_v, dt, &coeffs.a2[un], opts);

        // U stage: upwind advection of U_n along c1, mean-face d times grad V_{n+1}
        VectorField flux = upwind_apply(U[un], coeffs.c1[un]);
        VectorField gv_next = face_gradient(V_next);
        for (int k = 0; k < g.dim; ++k) {
            auto fd = face_dims(g, k);
            const std::int64_t s = g.stride[k];
            std::int64_t fi = 0;
            for (int j2 = 0; j2 < fd[2]; ++j2)
                for (int j1 = 0; j1 < fd[1]; ++j1)
                    for (int j0 = 0; j0 < fd[0]; ++j0, ++fi) {
                        const int jj[3] = {j0, j1, j2};
                        if (jj[k] == 0 || jj[k] == g.cells[k]) continue;
                        const std::int64_t right =
                            jj[0] * g.stride[0] + jj[1] * g.stride[1] + jj[2] * g.stride[2];
                        const double d_face =
                            0.5 * (coeffs.d[un][right - s] + coeffs.d[un][right]);
                        flux.face[k][static_cast<std::size_t>(fi)] +=
                            d_face * gv_next.face[k][static_cast<std::size_t>(fi)];
                    }
        }
        ScalarField div = div_face_flux(flux);
        ScalarField rhs_u(g);
        for (std::int64_t i = 0; i < g.total; ++i)
            rhs_u[i] = U[un][i] + dt * (-coeffs.a1[un][i] * U[un][i] -
                                        coeffs.b1[un][i] * V_next[i] - div[i] + gU[un][i]);
        ScalarField U_next = helmholtz_solve(rhs_u, dt, nullptr, opts);

        U.push_back(std::move(U_next));
        V.push_back(std::move(V_next));
    }
    return {std::move(U), std::move(V)};
}

}  // namespace ccopt
