#include "ccopt/forward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ccopt {

void validate(const ModelParams& p) {
    if (!(p.s >= 1.0)) throw ConfigError("model: s must be >= 1");
    if (!(p.q > 2.5)) throw ConfigError("model: q must be > 5/2");
    if (!(p.alpha > 0.0)) throw ConfigError("model: alpha must be > 0");
}

void validate(const TimeGrid& tg) {
    if (!(tg.T > 0.0)) throw ConfigError("time: T must be > 0");
    if (tg.steps < 1) throw ConfigError("time: steps must be >= 1");
}

ControlField make_control(const TimeGrid& tg, const SubdomainMask& mask,
                          double constant_value) {
    ControlField f;
    f.time_grid = tg;
    f.mask = mask;
    f.f_series.assign(static_cast<std::size_t>(tg.steps) + 1,
                      ScalarField(mask.grid, constant_value));
    apply_mask(f);
    return f;
}

void apply_mask(ControlField& f) {
    for (auto& field : f.f_series)
        for (std::size_t i = 0; i < field.values.size(); ++i)
            if (f.mask.indicator[i] == 0.0) field.values[i] = 0.0;
}

double clamped_pow(double u, double s) {
    return std::pow(std::max(u, 0.0), s);
}

double cfl_dt(const ScalarField& u, const ScalarField& v, const ModelParams& params) {
    (void)u;
    (void)params;
    VectorField g = face_gradient(v);
    double gmax = 0.0;
    for (int k = 0; k < v.grid.dim; ++k)
        for (double val : g.face[k]) gmax = std::max(gmax, std::abs(val));
    return v.grid.min_spacing() / (2.0 * v.grid.dim * gmax + 1e-30);
}

namespace {

double max_abs_face(const VectorField& g) {
    double m = 0.0;
    for (int k = 0; k < g.grid.dim; ++k)
        for (double val : g.face[k]) m = std::max(m, std::abs(val));
    return m;
}

void check_nonnegative_data(const ScalarField& w, const char* what) {
    for (double v : w.values)
        if (!(v >= -1e-12))
            throw ConfigError(std::string(what) + " must be nonnegative");
}

}  // namespace

VectorField upwind_flux(const ScalarField& u, const VectorField& g) {
    const Grid& gr = u.grid;
    VectorField out(gr);
    for (int k = 0; k < gr.dim; ++k) {
        auto fd = face_dims(gr, k);
        const std::int64_t s = gr.stride[k];
        std::int64_t f = 0;
        for (int j2 = 0; j2 < fd[2]; ++j2)
            for (int j1 = 0; j1 < fd[1]; ++j1)
                for (int j0 = 0; j0 < fd[0]; ++j0, ++f) {
                    const int jj[3] = {j0, j1, j2};
                    if (jj[k] == 0 || jj[k] == gr.cells[k]) continue;
                    const double gv = g.face[k][static_cast<std::size_t>(f)];
                    if (gv == 0.0) continue;
                    const std::int64_t right =
                        jj[0] * gr.stride[0] + jj[1] * gr.stride[1] + jj[2] * gr.stride[2];
                    const std::int64_t upw = (gv >= 0.0) ? right - s : right;
                    out.face[k][static_cast<std::size_t>(f)] = u[upw] * gv;
                }
    }
    return out;
}

std::pair<ScalarField, ScalarField> step_forward(const ScalarField& u, const ScalarField& v,
                                                 const ScalarField& f_node,
                                                 const SubdomainMask& mask,
                                                 const ModelParams& params, double dt,
                                                 const SolverOptions& opts) {
    const Grid& g = u.grid;

    // chemical update: (I - dt*Lap + dt*(u^s + f^-)) v_next = v + dt*f^+ v
    ScalarField react(g);
    ScalarField rhs_v(g);
    for (std::int64_t i = 0; i < g.total; ++i) {
        const double fm = mask.indicator[static_cast<std::size_t>(i)];
        const double fval = f_node[i] * fm;
        const double fpos = std::max(fval, 0.0);
        const double fneg = std::max(-fval, 0.0);
        react[i] = clamped_pow(u[i], params.s) + fneg;
        rhs_v[i] = v[i] + dt * fpos * v[i];
    }
    ScalarField v_next = helmholtz_solve(rhs_v, dt, &react, opts);
    require_finite(v_next, "chemical update");

    // positivity bound for the explicit upwind transport against grad v_next
    VectorField grad_v = face_gradient(v_next);
    const double admissible = g.min_spacing() / (2.0 * g.dim * max_abs_face(grad_v) + 1e-30);
    if (dt > admissible)
        throw CflError("time step exceeds the upwind positivity bound", admissible);

    // cell update: (I - dt*Lap) u_next = u - dt*div(u_upw grad v_next)
    ScalarField rhs_u = div_face_flux(upwind_flux(u, grad_v));
    for (std::int64_t i = 0; i < g.total; ++i) rhs_u[i] = u[i] - dt * rhs_u[i];
    ScalarField u_next = helmholtz_solve(rhs_u, dt, nullptr, opts);
    require_finite(u_next, "cell update");

    return {std::move(u_next), std::move(v_next)};
}

Trajectory solve_forward(const ScalarField& u0, const ScalarField& v0, const ControlField& f,
                         const ModelParams& params, const TimeGrid& tg,
                         const SolverOptions& opts) {
    validate(params);
    validate(tg);
    if (!same_grid(u0.grid, v0.grid) || !same_grid(u0.grid, f.mask.grid))
        throw ConfigError("solve_forward: grids of u0, v0 and control disagree");
    if (f.time_grid.steps != tg.steps || f.time_grid.T != tg.T)
        throw ConfigError("solve_forward: control not aligned with the time grid");
    if (f.f_series.size() != static_cast<std::size_t>(tg.steps) + 1)
        throw ConfigError("solve_forward: control series has wrong length");
    check_nonnegative_data(u0, "u0");
    check_nonnegative_data(v0, "v0");

    Trajectory traj;
    traj.time_grid = tg;
    traj.u_series.reserve(tg.steps + 1);
    traj.v_series.reserve(tg.steps + 1);
    traj.u_series.push_back(u0);
    traj.v_series.push_back(v0);
    const double dt = tg.dt();
    for (int n = 0; n < tg.steps; ++n) {
        auto [u_next, v_next] =
            step_forward(traj.u_series.back(), traj.v_series.back(),
                         f.f_series[static_cast<std::size_t>(n)], f.mask, params, dt, opts);
        if (!(field_min(u_next) >= -1e-12) || !(field_min(v_next) >= -1e-12))
            throw SolverError("solve_forward: state lost nonnegativity at step " +
                              std::to_string(n));
        traj.u_series.push_back(std::move(u_next));
        traj.v_series.push_back(std::move(v_next));
    }
    return traj;
}

ScalarField z_transform(const ScalarField& v, double alpha) {
    if (!(alpha > 0.0)) throw ConfigError("z_transform: alpha must be > 0");
    check_nonnegative_data(v, "z_transform: v");
    ScalarField z(v.grid);
    for (std::int64_t i = 0; i < v.grid.total; ++i)
        z[i] = std::sqrt(std::max(v[i], 0.0) + alpha * alpha);
    return z;
}

namespace {

double entropy_density(double u, double s) {
    const double uc = std::max(u, 0.0);
    if (s == 1.0) return (uc + 1.0) * std::log(uc + 1.0) - uc;
    return std::pow(uc, s) / (s * (s - 1.0));
}

// face-dual quadrature: each interior face carries one cell volume
double grad_sq_integral(const VectorField& g) {
    double s = 0.0;
    for (int k = 0; k < g.grid.dim; ++k)
        for (double val : g.face[k]) s += val * val;
    return s * g.grid.cell_volume;
}

}  // namespace

double free_energy(const ScalarField& u, const ScalarField& v, const ModelParams& params) {
    if (params.s > 1.0 && params.s < 1.0 + 1e-12)
        throw ConfigError("free_energy: s in (1, 1+1e-12) is ill-conditioned");
    check_nonnegative_data(u, "free_energy: u");
    ScalarField gu(u.grid);
    for (std::int64_t i = 0; i < u.grid.total; ++i)
        gu[i] = entropy_density(u[i], params.s);
    ScalarField z = z_transform(v, params.alpha);
    return 0.25 * params.s * integrate(gu) + 0.5 * grad_sq_integral(face_gradient(z));
}

DiagnosticsReport diagnostics(const Trajectory& traj, const ControlField& f,
                              const ModelParams& params) {
    (void)f;
    const TimeGrid& tg = traj.time_grid;
    const double dt = tg.dt();
    const Grid& g = traj.u_series.front().grid;

    DiagnosticsReport report;
    report.rows.reserve(tg.steps + 1);

    double crit_acc = 0.0;  // running sum of dt * ||u^s||_q^q (left endpoint)
    double cum_us_gz = 0.0, cum_gus2 = 0.0, cum_gz4 = 0.0, cum_lapz = 0.0;

    for (int n = 0; n <= tg.steps; ++n) {
        const ScalarField& u = traj.u_series[static_cast<std::size_t>(n)];
        const ScalarField& v = traj.v_series[static_cast<std::size_t>(n)];

        DiagnosticsRow row;
        row.time = n * dt;
        row.mass = integrate(u);
        row.min_u = field_min(u);
        row.max_u = field_max(u);
        row.min_v = field_min(v);
        row.max_v = field_max(v);
        row.energy = free_energy(u, v, params);

        ScalarField z = z_transform(v, params.alpha);
        VectorField gz = face_gradient(z);
        row.grad_z_sq = grad_sq_integral(gz);

        // u^s |grad z|^2 and |grad z|^4 / z^2 with face-averaged cell data
        double us_gz = 0.0, gz4 = 0.0;
        for (int k = 0; k < g.dim; ++k) {
            auto fd = face_dims(g, k);
            const std::int64_t s = g.stride[k];
            std::int64_t fi = 0;
            for (int j2 = 0; j2 < fd[2]; ++j2)
                for (int j1 = 0; j1 < fd[1]; ++j1)
                    for (int j0 = 0; j0 < fd[0]; ++j0, ++fi) {
                        const int jj[3] = {j0, j1, j2};
                        if (jj[k] == 0 || jj[k] == g.cells[k]) continue;
                        const double val = gz.face[k][static_cast<std::size_t>(fi)];
                        if (val == 0.0) continue;
                        const std::int64_t right =
                            jj[0] * g.stride[0] + jj[1] * g.stride[1] + jj[2] * g.stride[2];
                        const std::int64_t left = right - s;
                        const double us_face = 0.5 * (clamped_pow(u[left], params.s) +
                                                      clamped_pow(u[right], params.s));
                        const double z_face = 0.5 * (z[left] + z[right]);
                        us_gz += us_face * val * val;
                        gz4 += val * val * val * val / (z_face * z_face);
                    }
        }
        row.us_grad_z_sq = us_gz * g.cell_volume;
        row.grad_z4_over_z2 = gz4 * g.cell_volume;

        ScalarField us2(g);
        for (std::int64_t i = 0; i < g.total; ++i)
            us2[i] = clamped_pow(u[i] + 1.0, 0.5 * params.s);
        row.grad_us2_sq = grad_sq_integral(face_gradient(us2));

        ScalarField lapz = laplacian_neumann(z);
        row.lap_z_sq = dot(lapz, lapz);

        row.criterion_cum = (crit_acc > 0.0) ? std::pow(crit_acc, 1.0 / params.q) : 0.0;
        row.diss_us_grad_z_cum = cum_us_gz;
        row.diss_grad_us2_cum = cum_gus2;
        row.diss_grad_z4_cum = cum_gz4;
        row.diss_lap_z_cum = cum_lapz;
        report.rows.push_back(row);

        if (n < tg.steps) {
            double us_q = 0.0;
            for (std::int64_t i = 0; i < g.total; ++i)
                us_q += std::pow(clamped_pow(u[i], params.s), params.q);
            crit_acc += us_q * g.cell_volume * dt;
            cum_us_gz += row.us_grad_z_sq * dt;
            cum_gus2 += row.grad_us2_sq * dt;
            cum_gz4 += row.grad_z4_over_z2 * dt;
            cum_lapz += row.lap_z_sq * dt;
        }
    }
    return report;
}

double criterion_norm(const Trajectory& traj, const ModelParams& params) {
    const Grid& g = traj.u_series.front().grid;
    const double dt = traj.time_grid.dt();
    double acc = 0.0;
    for (int n = 0; n < traj.time_grid.steps; ++n) {
        const ScalarField& u = traj.u_series[static_cast<std::size_t>(n)];
        double us_q = 0.0;
        for (std::int64_t i = 0; i < g.total; ++i)
            us_q += std::pow(clamped_pow(u[i], params.s), params.q);
        acc += us_q * g.cell_volume * dt;
    }
    return (acc > 0.0) ? std::pow(acc, 1.0 / params.q) : 0.0;
}

}  // namespace ccopt
