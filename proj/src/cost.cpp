#include "ccopt/cost.hpp"

#include <algorithm>
#include <cmath>

namespace ccopt {

void validate(const ControlConstraints& c) {
    if (c.kind == ControlConstraints::Kind::box) {
        if (!std::isfinite(c.f_min) || !std::isfinite(c.f_max))
            throw ConfigError("control constraints: box bounds must be finite");
        if (!(c.f_min <= c.f_max))
            throw ConfigError("control constraints: f_min must not exceed f_max");
    }
}

void validate(const CostSpec& spec) {
    if (!(spec.gamma_u > 0.0)) throw ConfigError("cost: gamma_u must be > 0");
    if (!(spec.gamma_v >= 0.0)) throw ConfigError("cost: gamma_v must be >= 0");
    if (!(spec.gamma_f >= 0.0)) throw ConfigError("cost: gamma_f must be >= 0");
    if (!(spec.s >= 1.0)) throw ConfigError("cost: s must be >= 1");
    if (!(spec.q > 2.5)) throw ConfigError("cost: q must be > 5/2");
    validate(spec.constraints);
    if (!(spec.gamma_f > 0.0) && spec.constraints.kind != ControlConstraints::Kind::box)
        throw ConfigError("cost: gamma_f = 0 requires a bounded (box) constraint set");
}

double signed_power(double x, double r) {
    if (!(r > 0.0)) throw ConfigError("signed_power: exponent must be > 0");
    if (x == 0.0) return 0.0;
    return (x > 0.0) ? std::pow(x, r) : -std::pow(-x, r);
}

namespace {

void check_cost_alignment(const Trajectory& traj, const CostSpec& spec) {
    const auto nodes = static_cast<std::size_t>(traj.time_grid.steps) + 1;
    if (spec.u_d.size() != nodes || spec.v_d.size() != nodes)
        throw ConfigError("cost: desired-state series must have one field per node");
    if (!same_grid(spec.u_d.front().grid, traj.u_series.front().grid))
        throw ConfigError("cost: desired states live on a different grid");
}

}  // namespace

double evaluate_cost(const Trajectory& traj, const ControlField& f, const CostSpec& spec) {
    validate(spec);
    check_cost_alignment(traj, spec);
    const Grid& g = traj.u_series.front().grid;
    const int N = traj.time_grid.steps;
    const double dt = traj.time_grid.dt();
    const double sq = spec.s * spec.q;

    double track = 0.0;
    for (int n = 1; n <= N; ++n) {
        const auto un = static_cast<std::size_t>(n);
        double us = 0.0, vs = 0.0;
        for (std::int64_t i = 0; i < g.total; ++i) {
            us += std::pow(std::abs(traj.u_series[un][i] - spec.u_d[un][i]), sq);
            const double dv = traj.v_series[un][i] - spec.v_d[un][i];
            vs += dv * dv;
        }
        track += dt * (spec.gamma_u / sq * us + 0.5 * spec.gamma_v * vs) * g.cell_volume;
    }

    double ctrl = 0.0;
    for (int n = 0; n < N; ++n) {
        const ScalarField& fn = f.f_series[static_cast<std::size_t>(n)];
        double fs = 0.0;
        for (std::int64_t i = 0; i < g.total; ++i)
            fs += std::pow(std::abs(fn[i]), spec.q) * f.mask.indicator[static_cast<std::size_t>(i)];
        ctrl += dt * spec.gamma_f / spec.q * fs * g.cell_volume;
    }
    return track + ctrl;
}

std::pair<FieldSeries, FieldSeries> adjoint_sources(const Trajectory& traj,
                                                    const CostSpec& spec) {
    validate(spec);
    check_cost_alignment(traj, spec);
    const Grid& g = traj.u_series.front().grid;
    const int N = traj.time_grid.steps;
    const double sq1 = spec.s * spec.q - 1.0;

    FieldSeries gl, ge;
    gl.reserve(N + 1);
    ge.reserve(N + 1);
    for (int n = 0; n <= N; ++n) {
        const auto un = static_cast<std::size_t>(n);
        ScalarField a(g), b(g);
        for (std::int64_t i = 0; i < g.total; ++i) {
            a[i] = spec.gamma_u * signed_power(traj.u_series[un][i] - spec.u_d[un][i], sq1);
            b[i] = spec.gamma_v * (traj.v_series[un][i] - spec.v_d[un][i]);
        }
        gl.push_back(std::move(a));
        ge.push_back(std::move(b));
    }
    return {std::move(gl), std::move(ge)};
}

ControlField control_gradient(const ControlField& f, const Trajectory& traj,
                              const AdjointPair& adj, const CostSpec& spec) {
    validate(spec);
    if (adj.time_grid.steps != traj.time_grid.steps)
        throw ConfigError("control_gradient: adjoint not aligned with the trajectory");
    const Grid& g = traj.u_series.front().grid;
    const int N = traj.time_grid.steps;

    ControlField grad = f;  // copies grid/mask/time alignment
    for (int n = 0; n <= N; ++n) {
        const auto un = static_cast<std::size_t>(n);
        ScalarField& out = grad.f_series[un];
        if (n == N) {
            std::fill(out.values.begin(), out.values.end(), 0.0);
            continue;
        }
        ScalarField coupling = bilinear_coupling_field(traj, f, n);
        const ScalarField& eta = adj.eta_series[un];
        const ScalarField& fn = f.f_series[un];
        for (std::int64_t i = 0; i < g.total; ++i) {
            const double m = f.mask.indicator[static_cast<std::size_t>(i)];
            out[i] = m * (spec.gamma_f * signed_power(fn[i], spec.q - 1.0) +
                          coupling[i] * eta[i]);
        }
    }
    return grad;
}

ControlField explicit_control(const FieldSeries& v_series, const FieldSeries& eta_series,
                              double gamma_f, double q, const SubdomainMask& mask,
                              const TimeGrid& tg) {
    if (!(gamma_f > 0.0)) throw ConfigError("explicit_control: gamma_f must be > 0");
    if (!(q > 1.0)) throw ConfigError("explicit_control: q must exceed 1");
    const auto nodes = static_cast<std::size_t>(tg.steps) + 1;
    if (v_series.size() != nodes || eta_series.size() != nodes)
        throw ConfigError("explicit_control: series must have one field per node");
    const Grid& g = mask.grid;

    ControlField f;
    f.time_grid = tg;
    f.mask = mask;
    f.f_series.assign(nodes, ScalarField(g, 0.0));
    const double inv_qm1 = 1.0 / (q - 1.0);
    for (int n = 0; n < tg.steps; ++n) {
        const auto un = static_cast<std::size_t>(n);
        for (std::int64_t i = 0; i < g.total; ++i) {
            if (mask.indicator[static_cast<std::size_t>(i)] == 0.0) continue;
            const double eta = eta_series[un][i];
            if (eta == 0.0) continue;
            // the gradient pairs f >= 0 with v_n and f < 0 with v_{n+1};
            // sgn(f) = -sgn(eta) selects the level here
            const double v = (eta <= 0.0) ? v_series[un][i] : v_series[un + 1][i];
            const double mag = std::pow(std::max(v, 0.0) * std::abs(eta) / gamma_f, inv_qm1);
            f.f_series[un][i] = (eta > 0.0) ? -mag : mag;
        }
    }
    return f;
}

ControlField project_control(const ControlField& f, const ControlConstraints& constraints) {
    validate(constraints);
    if (constraints.kind == ControlConstraints::Kind::unconstrained) return f;
    ControlField out = f;
    for (auto& field : out.f_series)
        for (std::size_t i = 0; i < field.values.size(); ++i) {
            if (out.mask.indicator[i] == 0.0) continue;
            field.values[i] = std::clamp(field.values[i], constraints.f_min, constraints.f_max);
        }
    return out;
}

double control_l2_norm(const ControlField& f) {
    const double dt = f.time_grid.dt();
    double s = 0.0;
    for (int n = 0; n < f.time_grid.steps; ++n)
        s += dt * dot(f.f_series[static_cast<std::size_t>(n)],
                      f.f_series[static_cast<std::size_t>(n)]);
    return std::sqrt(s);
}

}  // namespace ccopt
