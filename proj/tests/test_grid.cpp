#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"

#include "ccopt/grid.hpp"

using namespace ccopt;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ScalarField random_field(const Grid& g, std::mt19937& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    ScalarField w(g);
    for (auto& v : w.values) v = dist(rng);
    return w;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("grid geometry invariants") {
    Grid g = make_grid(2, {4, 8}, {1.0, 2.0});
    CHECK(g.total == 32);
    CHECK(g.spacing[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(g.spacing[1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(g.cell_volume == doctest::Approx(0.0625).epsilon(1e-15));
    // spacing * cells reproduces the extent to one representable unit
    for (int k = 0; k < g.dim; ++k)
        CHECK(g.spacing[k] * g.cells[k] == doctest::Approx(g.extent[k]).epsilon(1e-15));
    CHECK_THROWS_AS(make_grid(0, {}, {}), ConfigError);
    CHECK_THROWS_AS(make_grid(1, {4}, {-1.0}), ConfigError);
    CHECK_THROWS_AS(make_grid(1, {0}, {1.0}), ConfigError);
}

TEST_CASE("laplacian of a constant vanishes") {
    for (int dim = 1; dim <= 3; ++dim) {
        std::vector<int> cells(dim, 4);
        std::vector<double> ext(dim, 1.0);
        Grid g = make_grid(dim, cells, ext);
        ScalarField w(g, 3.0);
        ScalarField lw = laplacian_neumann(w);
        for (double v : lw.values) CHECK(v == 0.0);
    }
}

TEST_CASE("laplacian hand stencil, 1D n=4 h=0.25") {
    Grid g = make_grid(1, {4}, {1.0});
    ScalarField w(g);
    w[2] = 1.0;
    ScalarField lw = laplacian_neumann(w);
    CHECK(lw[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(lw[1] == doctest::Approx(16.0).epsilon(1e-13));
    CHECK(lw[2] == doctest::Approx(-32.0).epsilon(1e-13));
    CHECK(lw[3] == doctest::Approx(16.0).epsilon(1e-13));
}

TEST_CASE("discrete conservation and self-adjointness") {
    std::mt19937 rng(42);
    Grid grids[] = {make_grid(1, {17}, {1.3}), make_grid(2, {8, 6}, {1.0, 0.7}),
                    make_grid(3, {5, 4, 3}, {1.0, 1.0, 2.0})};
    for (const Grid& g : grids) {
        ScalarField w1 = random_field(g, rng);
        ScalarField w2 = random_field(g, rng);
        double scale = lp_space_norm(w1, 2.0);
        CHECK(std::abs(integrate(laplacian_neumann(w1))) <= 1e-12 * scale);
        double lhs = dot(laplacian_neumann(w1), w2);
        double rhs = dot(w1, laplacian_neumann(w2));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + scale));
    }
}

TEST_CASE("div of face gradient equals the laplacian") {
    std::mt19937 rng(7);
    Grid g = make_grid(2, {9, 5}, {1.0, 1.0});
    ScalarField w = random_field(g, rng);
    ScalarField a = laplacian_neumann(w);
    ScalarField b = div_face_flux(face_gradient(w));
    double scale = lp_space_norm(a, kInf) + 1.0;
    for (std::int64_t i = 0; i < g.total; ++i)
        CHECK(std::abs(a[i] - b[i]) <= 1e-13 * scale);
}

TEST_CASE("face gradient basics") {
    Grid g = make_grid(1, {3}, {3.0});
    ScalarField w(g);
    w[0] = 0.0;
    w[1] = 1.0;
    w[2] = 3.0;
    VectorField gr = face_gradient(w);
    CHECK(gr.face[0][0] == 0.0);
    CHECK(gr.face[0][1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gr.face[0][2] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(gr.face[0][3] == 0.0);

    ScalarField c(g, 5.5);
    VectorField gc = face_gradient(c);
    for (double v : gc.face[0]) CHECK(v == 0.0);
}

TEST_CASE("face gradient is exact for linear data") {
    const double a = 1.7;
    for (int n : {8, 16, 32}) {
        Grid g = make_grid(1, {n}, {1.0});
        ScalarField w(g);
        for (int i = 0; i < n; ++i) w[i] = a * (i + 0.5) * g.spacing[0];
        VectorField gr = face_gradient(w);
        for (int f = 1; f < n; ++f)
            CHECK(gr.face[0][static_cast<std::size_t>(f)] ==
                  doctest::Approx(a).epsilon(1e-12));
    }
}

TEST_CASE("div_face_flux hand values and boundary rejection") {
    Grid g = make_grid(1, {3}, {3.0});
    VectorField flux(g);
    flux.face[0][1] = 1.0;
    flux.face[0][2] = 2.0;
    ScalarField d = div_face_flux(flux);
    CHECK(d[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d[2] == doctest::Approx(-2.0).epsilon(1e-15));

    VectorField zero(g);
    ScalarField dz = div_face_flux(zero);
    for (double v : dz.values) CHECK(v == 0.0);

    VectorField bad(g);
    bad.face[0][0] = 1.0;
    CHECK_THROWS_AS(div_face_flux(bad), ConfigError);
}

TEST_CASE("div telescopes to zero on random admissible fluxes") {
    std::mt19937 rng(3);
    Grid g = make_grid(2, {7, 7}, {1.0, 1.0});
    VectorField flux(g);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int k = 0; k < g.dim; ++k) {
        auto fd = face_dims(g, k);
        std::int64_t f = 0;
        for (int j2 = 0; j2 < fd[2]; ++j2)
            for (int j1 = 0; j1 < fd[1]; ++j1)
                for (int j0 = 0; j0 < fd[0]; ++j0, ++f) {
                    const int jj[3] = {j0, j1, j2};
                    if (jj[k] == 0 || jj[k] == g.cells[k]) continue;
                    flux.face[k][static_cast<std::size_t>(f)] = dist(rng);
                }
    }
    double fnorm = 0.0;
    for (int k = 0; k < g.dim; ++k)
        for (double v : flux.face[k]) fnorm += v * v;
    CHECK(std::abs(integrate(div_face_flux(flux))) <= 1e-12 * std::sqrt(fnorm));
}

TEST_CASE("integrate") {
    Grid g2 = make_grid(2, {5, 5}, {1.0, 1.0});
    CHECK(integrate(ScalarField(g2, 2.0)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(integrate(ScalarField(g2, 0.0)) == 0.0);

    Grid g1 = make_grid(1, {2}, {1.0});
    ScalarField w(g1);
    w[0] = 1.0;
    w[1] = 3.0;
    CHECK(integrate(w) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("lp norms") {
    Grid g = make_grid(1, {4}, {1.0});
    for (double p : {1.0, 2.0, 3.0, kInf})
        CHECK(lp_space_norm(ScalarField(g, -2.5), p) == doctest::Approx(2.5).epsilon(1e-14));

    Grid g2 = make_grid(1, {2}, {1.0});
    ScalarField w(g2);
    w[0] = -4.0;
    w[1] = 1.0;
    CHECK(lp_space_norm(w, kInf) == 4.0);

    ScalarField w2(g2);
    w2[0] = 3.0;
    w2[1] = 4.0;
    CHECK(lp_space_norm(w2, 2.0) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-14));

    CHECK_THROWS_AS(lp_space_norm(w, 0.5), ConfigError);
    CHECK(lp_space_norm(ScalarField(g, 0.0), 2.0) == 0.0);
}

TEST_CASE("norm monotonicity (Hoelder)") {
    std::mt19937 rng(11);
    Grid g = make_grid(2, {6, 9}, {1.5, 0.8});
    const double vol = g.domain_volume();
    for (int rep = 0; rep < 20; ++rep) {
        ScalarField w = random_field(g, rng, -3.0, 3.0);
        double winf = lp_space_norm(w, kInf);
        for (double p : {1.0, 2.0, 3.0})
            CHECK(lp_space_norm(w, p) <= winf * std::pow(vol, 1.0 / p) * (1.0 + 1e-13));
    }
}

TEST_CASE("bochner norms") {
    Grid g = make_grid(1, {4}, {1.0});
    std::vector<ScalarField> series(4, ScalarField(g, 1.5));
    CHECK(bochner_norm(series, 2.0, 2.0, 0.25) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(bochner_norm(series, kInf, 2.0, 0.25) == doctest::Approx(1.5).epsilon(1e-14));

    std::vector<ScalarField> two{ScalarField(g, 1.0), ScalarField(g, 2.0)};
    CHECK(bochner_norm(two, 2.0, 2.0, 0.5) ==
          doctest::Approx(std::sqrt(2.5)).epsilon(1e-14));
    CHECK(bochner_norm(two, kInf, kInf, 0.5) == 2.0);

    CHECK_THROWS_AS(bochner_norm({}, 2.0, 2.0, 0.1), ConfigError);
}

TEST_CASE("box masks") {
    Grid g = make_grid(1, {4}, {1.0});
    SubdomainMask m = make_box_mask(g, {0.0}, {0.5});
    CHECK(m.indicator[0] == 1.0);
    CHECK(m.indicator[1] == 1.0);
    CHECK(m.indicator[2] == 0.0);
    CHECK(m.indicator[3] == 0.0);
    CHECK(mask_volume(m) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(make_box_mask(g, {2.0}, {3.0}), ConfigError);
}

}  // TEST_SUITE
