#include <cmath>
#include <random>

#include "doctest.h"

#include "ccopt/forward.hpp"

using namespace ccopt;

namespace {

SubdomainMask whole_domain(const Grid& g) {
    SubdomainMask m;
    m.grid = g;
    m.indicator.assign(static_cast<std::size_t>(g.total), 1.0);
    return m;
}

ScalarField bump(const Grid& g, double base, double amp) {
    ScalarField w(g, base);
    std::int64_t idx = 0;
    for (int i2 = 0; i2 < g.cells[2]; ++i2)
        for (int i1 = 0; i1 < g.cells[1]; ++i1)
            for (int i0 = 0; i0 < g.cells[0]; ++i0, ++idx) {
                const int ii[3] = {i0, i1, i2};
                double r2 = 0.0;
                for (int k = 0; k < g.dim; ++k) {
                    double c = (ii[k] + 0.5) * g.spacing[k] - 0.37 * g.extent[k];
                    r2 += c * c;
                }
                w[idx] = base + amp * std::exp(-r2 / 0.02);
            }
    return w;
}

}  // namespace

TEST_SUITE("forward") {

TEST_CASE("constant-data step reduces to scalar algebra") {
    Grid g = make_grid(1, {8}, {1.0});
    SubdomainMask mask = whole_domain(g);
    ModelParams params;
    const double dt = 0.01;
    auto [u1, v1] = step_forward(ScalarField(g, 2.0), ScalarField(g, 1.0), ScalarField(g, 0.0),
                                 mask, params, dt);
    for (double v : u1.values) CHECK(v == doctest::Approx(2.0).epsilon(1e-13));
    for (double v : v1.values) CHECK(v == doctest::Approx(1.0 / 1.02).epsilon(1e-13));
}

TEST_CASE("zero cell density stays zero while the control drives v") {
    Grid g = make_grid(1, {8}, {1.0});
    ModelParams params;
    TimeGrid tg{0.1, 10};
    ControlField f = make_control(tg, make_box_mask(g, {0.0}, {0.5}), 0.3);
    ScalarField v0 = bump(g, 1.0, 0.2);
    Trajectory traj = solve_forward(ScalarField(g, 0.0), v0, f, params, tg);
    for (const auto& u : traj.u_series)
        for (double v : u.values) CHECK(v == 0.0);
    // with u == 0 there is no consumption; the masked control feeds v
    CHECK(integrate(traj.v_series.back()) > 0.99 * integrate(v0));
}

TEST_CASE("zero chemical stays zero, u follows the heat flow") {
    Grid g = make_grid(1, {16}, {1.0});
    ModelParams params;
    TimeGrid tg{0.1, 20};
    ControlField f = make_control(tg, whole_domain(g), 0.0);
    ScalarField u0 = bump(g, 1.0, 1.0);
    Trajectory traj = solve_forward(u0, ScalarField(g, 0.0), f, params, tg);
    for (const auto& v : traj.v_series)
        for (double val : v.values) CHECK(val == 0.0);
    // pure diffusion: mass conserved, extremes contract
    CHECK(integrate(traj.u_series.back()) ==
          doctest::Approx(integrate(u0)).epsilon(1e-10));
    CHECK(field_max(traj.u_series.back()) <= field_max(u0) + 1e-10);
}

TEST_CASE("constant-data run matches the consumption ODE") {
    Grid g = make_grid(1, {16}, {1.0});
    ModelParams params;  // s = 1
    TimeGrid tg{0.5, 500};
    ControlField f = make_control(tg, whole_domain(g), 0.0);
    Trajectory traj = solve_forward(ScalarField(g, 2.0), ScalarField(g, 1.0), f, params, tg);
    const double v_exact = std::exp(-1.0);
    const double v_num = traj.v_series.back()[0];
    CHECK(std::abs(v_num - v_exact) / v_exact <= 1e-3);

    // first order in dt: halving the step roughly halves the error
    double prev_err = 0.0;
    for (int steps : {500, 1000, 2000}) {
        TimeGrid tgr{0.5, steps};
        ControlField fr = make_control(tgr, whole_domain(g), 0.0);
        Trajectory t = solve_forward(ScalarField(g, 2.0), ScalarField(g, 1.0), fr, params, tgr);
        double err = std::abs(t.v_series.back()[0] - v_exact);
        if (prev_err > 0.0) {
            double ratio = prev_err / err;
            CHECK(ratio >= 1.7);
            CHECK(ratio <= 2.3);
        }
        prev_err = err;
    }
}

TEST_CASE("mass conservation with active chemotaxis") {
    Grid g = make_grid(2, {12, 12}, {1.0, 1.0});
    ModelParams params;
    ScalarField u0 = bump(g, 0.5, 1.5);
    ScalarField v0 = bump(g, 0.8, 0.4);
    double dt_bound = cfl_dt(u0, v0, params);
    TimeGrid tg{0.25 * dt_bound * 100, 100};
    ControlField f = make_control(tg, make_box_mask(g, {0.0, 0.0}, {0.5, 1.0}), 0.4);
    Trajectory traj = solve_forward(u0, v0, f, params, tg);
    const double m0 = integrate(u0);
    for (const auto& u : traj.u_series)
        CHECK(std::abs(integrate(u) - m0) <= 1e-8 * m0);
}

TEST_CASE("nonnegativity under the cfl bound") {
    Grid g = make_grid(1, {32}, {1.0});
    ModelParams params{1.5, 1e-4, 3.0};
    ScalarField u0 = bump(g, 0.0, 2.0);  // touches zero away from the bump
    ScalarField v0 = bump(g, 0.5, 0.8);
    TimeGrid tg{0.2 * cfl_dt(u0, v0, params) * 60, 60};
    ControlField f = make_control(tg, whole_domain(g), -0.3);
    Trajectory traj = solve_forward(u0, v0, f, params, tg);
    for (std::size_t n = 0; n < traj.u_series.size(); ++n) {
        CHECK(field_min(traj.u_series[n]) >= -1e-12);
        CHECK(field_min(traj.v_series[n]) >= -1e-12);
    }
}

TEST_CASE("cfl bound formula and monotonicity") {
    Grid g = make_grid(1, {10}, {1.0});  // h = 0.1
    ModelParams params;
    // v with max face gradient 5: ramp of slope 5 => interior faces all 5
    ScalarField v(g);
    for (int i = 0; i < 10; ++i) v[i] = 5.0 * (i + 0.5) * 0.1;
    CHECK(cfl_dt(ScalarField(g, 1.0), v, params) == doctest::Approx(0.01).epsilon(1e-9));

    ScalarField v2(g);
    for (int i = 0; i < 10; ++i) v2[i] = 2.0 * v[i];
    CHECK(cfl_dt(ScalarField(g, 1.0), v2, params) ==
          doctest::Approx(0.005).epsilon(1e-9));

    // constant v: no advection, bound is astronomically large
    CHECK(cfl_dt(ScalarField(g, 1.0), ScalarField(g, 3.0), params) > 1e20);
}

TEST_CASE("cfl violation raises with the admissible step") {
    // a near-linear chemical profile keeps its gradient through one implicit
    // diffusion step, so an oversized dt cannot smooth itself back under the
    // bound before the check
    Grid g = make_grid(1, {10}, {1.0});
    ModelParams params;
    ScalarField u0(g, 0.0);
    ScalarField v0(g);
    for (int i = 0; i < 10; ++i) v0[i] = 5.0 * (i + 0.5) * 0.1;
    SubdomainMask mask = whole_domain(g);
    const double bound = cfl_dt(u0, v0, params);  // 0.01
    try {
        step_forward(u0, v0, ScalarField(g, 0.0), mask, params, 2.0 * bound);
        FAIL("expected CflError");
    } catch (const CflError& e) {
        CHECK(e.admissible_dt() > 0.0);
        CHECK(e.admissible_dt() < 2.0 * bound);
    }
}

TEST_CASE("z transform") {
    Grid g = make_grid(1, {4}, {1.0});
    ScalarField z = z_transform(ScalarField(g, 0.0), 0.1);
    for (double v : z.values) CHECK(v == doctest::Approx(0.1).epsilon(1e-15));

    ScalarField v(g, 0.21);
    ScalarField z2 = z_transform(v, 0.2);
    for (double val : z2.values) CHECK(val == doctest::Approx(0.5).epsilon(1e-14));

    CHECK_THROWS_AS(z_transform(v, 0.0), ConfigError);
    ScalarField neg(g, -1.0);
    CHECK_THROWS_AS(z_transform(neg, 0.1), ConfigError);
}

TEST_CASE("free energy closed forms") {
    Grid g = make_grid(1, {8}, {1.0});
    ModelParams p1;  // s = 1
    CHECK(free_energy(ScalarField(g, 0.0), ScalarField(g, 0.7), p1) ==
          doctest::Approx(0.0).epsilon(1e-15));

    const double c = 1.8;
    double expected1 = 0.25 * ((c + 1.0) * std::log(c + 1.0) - c);
    CHECK(free_energy(ScalarField(g, c), ScalarField(g, 0.7), p1) ==
          doctest::Approx(expected1).epsilon(1e-13));

    ModelParams p2{2.0, 1e-4, 3.0};
    CHECK(free_energy(ScalarField(g, c), ScalarField(g, 0.7), p2) ==
          doctest::Approx(c * c / 4.0).epsilon(1e-13));

    ModelParams bad{1.0 + 1e-13, 1e-4, 3.0};
    CHECK_THROWS_AS(free_energy(ScalarField(g, c), ScalarField(g, 0.7), bad), ConfigError);
}

TEST_CASE("diagnostics on the constant run") {
    Grid g = make_grid(1, {16}, {1.0});
    ModelParams params;
    TimeGrid tg{1.0, 100};
    ControlField f = make_control(tg, whole_domain(g), 0.0);
    Trajectory traj = solve_forward(ScalarField(g, 2.0), ScalarField(g, 1.0), f, params, tg);
    DiagnosticsReport rep = diagnostics(traj, f, params);

    const double e0 = rep.rows.front().energy;
    for (const auto& r : rep.rows) {
        CHECK(std::abs(r.energy - e0) <= 1e-10);
        CHECK(r.grad_z_sq == 0.0);
    }
    // ||u^s||_{L^q(Q)} = 2 for u == 2, s = 1, q = 3 on the unit cylinder
    CHECK(rep.rows.back().criterion_cum == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(criterion_norm(traj, params) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("chemical maximum principle under nonpositive control") {
    Grid g = make_grid(1, {24}, {1.0});
    ModelParams params;
    ScalarField u0 = bump(g, 0.6, 1.0);
    ScalarField v0 = bump(g, 0.5, 0.5);
    TimeGrid tg{0.2 * cfl_dt(u0, v0, params) * 80, 80};
    ControlField f = make_control(tg, make_box_mask(g, {0.25}, {0.75}), -0.7);
    Trajectory traj = solve_forward(u0, v0, f, params, tg);
    DiagnosticsReport rep = diagnostics(traj, f, params);
    for (std::size_t n = 1; n < rep.rows.size(); ++n)
        CHECK(rep.rows[n].max_v <= rep.rows[n - 1].max_v + 1e-10);
}

TEST_CASE("spatially constant states stay spatially constant") {
    Grid g = make_grid(2, {6, 6}, {1.0, 1.0});
    ModelParams params{2.0, 1e-4, 3.0};
    TimeGrid tg{0.3, 30};
    ControlField f = make_control(tg, whole_domain(g), 0.25);
    Trajectory traj = solve_forward(ScalarField(g, 1.2), ScalarField(g, 0.9), f, params, tg);
    for (std::size_t n = 0; n < traj.u_series.size(); ++n) {
        const double u0 = traj.u_series[n][0];
        const double v0 = traj.v_series[n][0];
        for (double v : traj.u_series[n].values) CHECK(std::abs(v - u0) <= 1e-12);
        for (double v : traj.v_series[n].values) CHECK(std::abs(v - v0) <= 1e-12);
    }
}

TEST_CASE("input validation") {
    Grid g = make_grid(1, {8}, {1.0});
    ModelParams params;
    TimeGrid tg{0.1, 10};
    ControlField f = make_control(tg, whole_domain(g), 0.0);
    ScalarField neg(g, -0.5);
    CHECK_THROWS_AS(solve_forward(neg, ScalarField(g, 1.0), f, params, tg), ConfigError);
    ControlField misaligned = make_control(TimeGrid{0.1, 5}, whole_domain(g), 0.0);
    CHECK_THROWS_AS(solve_forward(ScalarField(g, 1.0), ScalarField(g, 1.0), misaligned,
                                  params, tg),
                    ConfigError);
    CHECK_THROWS_AS(validate(ModelParams{0.5, 1e-4, 3.0}), ConfigError);
    CHECK_THROWS_AS(validate(ModelParams{1.0, 1e-4, 2.0}), ConfigError);
}

}  // TEST_SUITE
