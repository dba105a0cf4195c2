#include "ccopt/commands.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "ccopt/field_io.hpp"

namespace ccopt {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

std::filesystem::path prepare_outdir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.output.dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir.string());
    return dir;
}

// printf-style pattern taking one time index; anything fancier is rejected
std::string instantiate_pattern(const std::string& pattern, int index) {
    int placeholders = 0;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] != '%') continue;
        std::size_t j = i + 1;
        while (j < pattern.size() && std::isdigit(static_cast<unsigned char>(pattern[j]))) ++j;
        if (j >= pattern.size() || pattern[j] != 'd')
            throw ConfigError("pattern must use a single %d (optionally zero-padded): " +
                              pattern);
        ++placeholders;
        i = j;
    }
    if (placeholders != 1)
        throw ConfigError("pattern must contain exactly one %d placeholder: " + pattern);
    char buf[4096];
    std::snprintf(buf, sizeof buf, pattern.c_str(), index);
    return buf;
}

struct ForwardSetup {
    Grid grid;
    TimeGrid tg;
    ScalarField u0;
    ScalarField v0;
    SubdomainMask mask;
    ControlField f;
};

ForwardSetup build_setup(const RunConfig& cfg) {
    ForwardSetup s;
    s.grid = build_grid(cfg);
    s.tg = TimeGrid{cfg.time.T, cfg.time.steps};
    s.u0 = build_field(cfg.u0, s.grid);
    s.v0 = build_field(cfg.v0, s.grid);
    s.mask = build_mask(cfg, s.grid);
    s.f = build_initial_control(cfg, s.grid, s.mask);
    return s;
}

void write_diagnostics_csv(const std::filesystem::path& path, const DiagnosticsReport& rep,
                           bool extended) {
    auto out = open_out(path);
    out << "time,mass,min_u,max_u,min_v,max_v,energy,grad_z_sq,criterion_cum";
    if (extended)
        out << ",us_grad_z_sq,grad_us2_sq,grad_z4_over_z2,lap_z_sq"
               ",diss_us_grad_z_cum,diss_grad_us2_cum,diss_grad_z4_cum,diss_lap_z_cum";
    out << "\n";
    for (const auto& r : rep.rows) {
        out << fmt(r.time) << ',' << fmt(r.mass) << ',' << fmt(r.min_u) << ',' << fmt(r.max_u)
            << ',' << fmt(r.min_v) << ',' << fmt(r.max_v) << ',' << fmt(r.energy) << ','
            << fmt(r.grad_z_sq) << ',' << fmt(r.criterion_cum);
        if (extended)
            out << ',' << fmt(r.us_grad_z_sq) << ',' << fmt(r.grad_us2_sq) << ','
                << fmt(r.grad_z4_over_z2) << ',' << fmt(r.lap_z_sq) << ','
                << fmt(r.diss_us_grad_z_cum) << ',' << fmt(r.diss_grad_us2_cum) << ','
                << fmt(r.diss_grad_z4_cum) << ',' << fmt(r.diss_lap_z_cum);
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void dump_trajectory(const std::filesystem::path& dir, const Trajectory& traj) {
    for (int n = 0; n <= traj.time_grid.steps; ++n) {
        char name[64];
        std::snprintf(name, sizeof name, "u_%06d.fld", n);
        write_field((dir / name).string(), traj.u_series[static_cast<std::size_t>(n)], n);
        std::snprintf(name, sizeof name, "v_%06d.fld", n);
        write_field((dir / name).string(), traj.v_series[static_cast<std::size_t>(n)], n);
    }
}

void forward_common(const RunConfig& cfg, bool extended, const char* csv_name) {
    auto dir = prepare_outdir(cfg);
    ForwardSetup s = build_setup(cfg);
    Trajectory traj = solve_forward(s.u0, s.v0, s.f, cfg.model, s.tg);
    DiagnosticsReport rep = diagnostics(traj, s.f, cfg.model);
    write_diagnostics_csv(dir / csv_name, rep, extended);
    if (cfg.output.dump_fields) dump_trajectory(dir, traj);
}

CostSpec build_cost_spec(const RunConfig& cfg, const ForwardSetup& s) {
    if (!cfg.cost) throw ConfigError("this command requires a 'cost' block");
    const CostConfig& cc = *cfg.cost;
    CostSpec spec;
    spec.gamma_u = cc.gamma_u;
    spec.gamma_v = cc.gamma_v;
    spec.gamma_f = cc.gamma_f;
    spec.s = cfg.model.s;
    spec.q = cfg.model.q;
    spec.constraints = cfg.control.constraints;

    if (cc.desired == CostConfig::Desired::generate) {
        ControlField f_star;
        switch (cc.fstar) {
            case ControlConfig::Initial::zero:
                f_star = make_control(s.tg, s.mask, 0.0);
                break;
            case ControlConfig::Initial::constant:
                f_star = make_control(s.tg, s.mask, cc.fstar_value);
                break;
            case ControlConfig::Initial::file: {
                ScalarField base = read_field_on_grid(cc.fstar_file, s.grid);
                f_star.time_grid = s.tg;
                f_star.mask = s.mask;
                f_star.f_series.assign(static_cast<std::size_t>(s.tg.steps) + 1, base);
                apply_mask(f_star);
                break;
            }
        }
        auto [u_d, v_d] = make_tracking_problem(s.u0, s.v0, f_star, cfg.model, s.tg);
        spec.u_d = std::move(u_d);
        spec.v_d = std::move(v_d);
    } else {
        for (int n = 0; n <= s.tg.steps; ++n) {
            spec.u_d.push_back(
                read_field_on_grid(instantiate_pattern(cc.u_d_pattern, n), s.grid));
            spec.v_d.push_back(
                read_field_on_grid(instantiate_pattern(cc.v_d_pattern, n), s.grid));
        }
    }
    validate(spec);
    return spec;
}

ControlField random_direction(const TimeGrid& tg, const SubdomainMask& mask,
                              std::mt19937& rng) {
    ControlField F = make_control(tg, mask, 0.0);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int n = 0; n < tg.steps; ++n)
        for (std::size_t i = 0; i < F.f_series[static_cast<std::size_t>(n)].values.size(); ++i)
            if (mask.indicator[i] != 0.0)
                F.f_series[static_cast<std::size_t>(n)].values[i] = dist(rng);
    return F;
}

FieldSeries random_series(const Grid& grid, int nodes, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    FieldSeries s;
    s.reserve(nodes);
    for (int n = 0; n < nodes; ++n) {
        ScalarField w(grid);
        for (auto& v : w.values) v = dist(rng);
        s.push_back(std::move(w));
    }
    return s;
}

}  // namespace

void run_forward(const RunConfig& cfg) { forward_common(cfg, false, "forward.csv"); }

void run_diagnose(const RunConfig& cfg) { forward_common(cfg, true, "diagnose.csv"); }

bool run_gradcheck(const RunConfig& cfg) {
    constexpr double kTransposeTol = 1e-10;
    constexpr double kGradientTol = 1e-5;
    constexpr double kRouteTol = 1e-10;

    auto dir = prepare_outdir(cfg);
    ForwardSetup s = build_setup(cfg);
    const double dt = s.tg.dt();
    SolverOptions tight{1e-13};

    Trajectory traj = solve_forward(s.u0, s.v0, s.f, cfg.model, s.tg, tight);
    CostSpec spec = build_cost_spec(cfg, s);

    std::mt19937 rng(cfg.gradcheck.seed);

    double transpose_max = 0.0;
    for (int t = 0; t < cfg.gradcheck.transpose_trials; ++t) {
        ControlField F = random_direction(s.tg, s.mask, rng);
        FieldSeries wl = random_series(s.grid, s.tg.steps + 1, rng);
        FieldSeries we = random_series(s.grid, s.tg.steps + 1, rng);
        transpose_max =
            std::max(transpose_max, transpose_check(traj, s.f, cfg.model, F, wl, we, tight));
    }

    auto [g_lambda, g_eta] = adjoint_sources(traj, spec);
    AdjointPair adj = solve_adjoint(traj, s.f, cfg.model, g_lambda, g_eta, tight);
    ControlField grad = control_gradient(s.f, traj, adj, spec);

    double grad_max_err = 0.0;
    double route_max_err = 0.0;
    const double eps = cfg.gradcheck.eps;
    for (int t = 0; t < cfg.gradcheck.directions; ++t) {
        ControlField F = random_direction(s.tg, s.mask, rng);

        auto shifted = [&](double sign) {
            ControlField fp = s.f;
            for (std::size_t n = 0; n < fp.f_series.size(); ++n)
                for (std::size_t i = 0; i < fp.f_series[n].values.size(); ++i)
                    fp.f_series[n].values[i] += sign * eps * F.f_series[n].values[i];
            Trajectory tr = solve_forward(s.u0, s.v0, fp, cfg.model, s.tg, tight);
            return evaluate_cost(tr, fp, spec);
        };
        const double dJ_fd = (shifted(+1.0) - shifted(-1.0)) / (2.0 * eps);
        const double dJ_adj = control_pairing(grad.f_series, F.f_series, dt);
        const double scale = std::max(std::abs(dJ_fd), std::abs(dJ_adj));
        if (scale > 0.0)
            grad_max_err = std::max(grad_max_err, std::abs(dJ_fd - dJ_adj) / scale);

        // same derivative through the tangent route
        auto [U, V] = solve_tangent(traj, s.f, cfg.model, F, tight);
        double dJ_tan = state_pairing(U, V, g_lambda, g_eta, dt);
        for (int n = 0; n < s.tg.steps; ++n) {
            const auto un = static_cast<std::size_t>(n);
            ScalarField rho(s.grid);
            for (std::int64_t i = 0; i < s.grid.total; ++i)
                rho[i] = spec.gamma_f *
                         signed_power(s.f.f_series[un][i], spec.q - 1.0) *
                         s.mask.indicator[static_cast<std::size_t>(i)];
            dJ_tan += dt * dot(rho, F.f_series[un]);
        }
        const double rscale = std::max(std::abs(dJ_tan), std::abs(dJ_adj));
        if (rscale > 0.0)
            route_max_err = std::max(route_max_err, std::abs(dJ_tan - dJ_adj) / rscale);
    }

    const bool transpose_pass = transpose_max <= kTransposeTol;
    const bool gradient_pass = grad_max_err <= kGradientTol;
    const bool route_pass = route_max_err <= kRouteTol;
    const bool pass = transpose_pass && gradient_pass && route_pass;

    nlohmann::ordered_json j;
    j["transpose"] = {{"trials", cfg.gradcheck.transpose_trials},
                      {"max_discrepancy", transpose_max},
                      {"tolerance", kTransposeTol},
                      {"pass", transpose_pass}};
    j["gradient"] = {{"directions", cfg.gradcheck.directions},
                     {"eps", eps},
                     {"max_rel_error", grad_max_err},
                     {"tolerance", kGradientTol},
                     {"pass", gradient_pass}};
    j["routes"] = {{"max_rel_error", route_max_err},
                   {"tolerance", kRouteTol},
                   {"pass", route_pass}};
    j["pass"] = pass;
    j["config"] = config_echo(cfg);

    auto out = open_out(dir / "gradcheck.json");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: gradcheck.json");
    return pass;
}

bool run_optimize(const RunConfig& cfg) {
    auto dir = prepare_outdir(cfg);
    ForwardSetup s = build_setup(cfg);
    CostSpec spec = build_cost_spec(cfg, s);

    OptimizationReport rep =
        projected_gradient_descent(s.u0, s.v0, s.f, cfg.model, spec, cfg.optimize);

    {
        auto out = open_out(dir / "optimize_iters.csv");
        out << "iter,J,residual,step,criterion\n";
        for (const auto& it : rep.iterates)
            out << it.iter << ',' << fmt(it.cost) << ',' << fmt(it.residual) << ','
                << fmt(it.step) << ',' << fmt(it.criterion) << "\n";
        if (!out) throw IoError("write failed: optimize_iters.csv");
    }

    const ControlField& f = rep.final_control;
    const double dt = f.time_grid.dt();
    double lq = 0.0;
    for (int n = 0; n < f.time_grid.steps; ++n) {
        const ScalarField& fn = f.f_series[static_cast<std::size_t>(n)];
        for (std::int64_t i = 0; i < fn.grid.total; ++i)
            lq += std::pow(std::abs(fn[i]), spec.q) * fn.grid.cell_volume * dt;
    }

    nlohmann::ordered_json j;
    j["converged"] = rep.converged;
    j["reason"] = rep.reason;
    j["iterations"] = rep.iterates.empty() ? 0 : rep.iterates.back().iter;
    j["final_cost"] = rep.iterates.empty() ? 0.0 : rep.iterates.back().cost;
    j["final_residual"] = rep.iterates.empty() ? 0.0 : rep.iterates.back().residual;
    j["final_criterion"] = rep.iterates.empty() ? 0.0 : rep.iterates.back().criterion;
    j["final_control_l2"] = control_l2_norm(f);
    j["final_control_lq"] = std::pow(lq, 1.0 / spec.q);
    j["config"] = config_echo(cfg);

    auto out = open_out(dir / "optimize_summary.json");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: optimize_summary.json");

    if (cfg.output.dump_fields)
        for (int n = 0; n <= f.time_grid.steps; ++n) {
            char name[64];
            std::snprintf(name, sizeof name, "f_%06d.fld", n);
            write_field((dir / name).string(), f.f_series[static_cast<std::size_t>(n)], n);
        }
    return rep.converged;
}

}  // namespace ccopt
