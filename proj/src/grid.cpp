#include "ccopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ccopt {

Grid make_grid(int dim, const std::vector<int>& cells_per_axis,
               const std::vector<double>& extent_per_axis) {
    if (dim < 1 || dim > 3)
        throw ConfigError("grid dim must be 1, 2 or 3");
    if (static_cast<int>(cells_per_axis.size()) != dim ||
        static_cast<int>(extent_per_axis.size()) != dim)
        throw ConfigError("grid: cells and extent must have one entry per axis");

    Grid g;
    g.dim = dim;
    for (int k = 0; k < dim; ++k) {
        if (cells_per_axis[k] < 1)
            throw ConfigError("grid: cells per axis must be positive");
        if (!(extent_per_axis[k] > 0.0) || !std::isfinite(extent_per_axis[k]))
            throw ConfigError("grid: extent per axis must be positive and finite");
        g.cells[k] = cells_per_axis[k];
        g.extent[k] = extent_per_axis[k];
        g.spacing[k] = extent_per_axis[k] / cells_per_axis[k];
    }
    g.total = 1;
    for (int k = 0; k < 3; ++k) {
        g.stride[k] = g.total;
        g.total *= g.cells[k];
    }
    g.cell_volume = 1.0;
    for (int k = 0; k < dim; ++k) g.cell_volume *= g.spacing[k];
    return g;
}

double Grid::min_spacing() const {
    double h = spacing[0];
    for (int k = 1; k < dim; ++k) h = std::min(h, spacing[k]);
    return h;
}

bool same_grid(const Grid& a, const Grid& b) {
    if (a.dim != b.dim) return false;
    for (int k = 0; k < a.dim; ++k)
        if (a.cells[k] != b.cells[k] || a.extent[k] != b.extent[k]) return false;
    return true;
}

VectorField::VectorField(const Grid& g) : grid(g) {
    for (int k = 0; k < g.dim; ++k)
        face[k].assign(static_cast<std::size_t>(face_total(g, k)), 0.0);
}

std::array<int, 3> face_dims(const Grid& g, int axis) {
    std::array<int, 3> fd = g.cells;
    fd[axis] += 1;
    return fd;
}

std::int64_t face_total(const Grid& g, int axis) {
    auto fd = face_dims(g, axis);
    return static_cast<std::int64_t>(fd[0]) * fd[1] * fd[2];
}

SubdomainMask make_box_mask(const Grid& grid, const std::vector<double>& lo,
                            const std::vector<double>& hi) {
    if (static_cast<int>(lo.size()) != grid.dim || static_cast<int>(hi.size()) != grid.dim)
        throw ConfigError("mask box: lo/hi must have one entry per axis");
    SubdomainMask m;
    m.grid = grid;
    m.indicator.assign(static_cast<std::size_t>(grid.total), 0.0);
    std::int64_t count = 0;
    std::int64_t idx = 0;
    for (int i2 = 0; i2 < grid.cells[2]; ++i2)
        for (int i1 = 0; i1 < grid.cells[1]; ++i1)
            for (int i0 = 0; i0 < grid.cells[0]; ++i0, ++idx) {
                const int ii[3] = {i0, i1, i2};
                bool inside = true;
                for (int k = 0; k < grid.dim; ++k) {
                    double c = (ii[k] + 0.5) * grid.spacing[k];
                    if (c < lo[k] || c > hi[k]) { inside = false; break; }
                }
                if (inside) {
                    m.indicator[static_cast<std::size_t>(idx)] = 1.0;
                    ++count;
                }
            }
    if (count == 0)
        throw ConfigError("mask box: no cell center lies inside the box");
    return m;
}

double mask_volume(const SubdomainMask& mask) {
    double s = 0.0;
    for (double v : mask.indicator) s += v;
    return s * mask.grid.cell_volume;
}

ScalarField laplacian_neumann(const ScalarField& w) {
    const Grid& g = w.grid;
    ScalarField out(g);
    std::int64_t idx = 0;
    for (int i2 = 0; i2 < g.cells[2]; ++i2)
        for (int i1 = 0; i1 < g.cells[1]; ++i1)
            for (int i0 = 0; i0 < g.cells[0]; ++i0, ++idx) {
                const int ii[3] = {i0, i1, i2};
                double acc = 0.0;
                for (int k = 0; k < g.dim; ++k) {
                    const double h = g.spacing[k];
                    const std::int64_t s = g.stride[k];
                    // zero flux through boundary faces (mirrored ghosts)
                    double flux_r = (ii[k] + 1 < g.cells[k]) ? (w[idx + s] - w[idx]) / h : 0.0;
                    double flux_l = (ii[k] > 0) ? (w[idx] - w[idx - s]) / h : 0.0;
                    acc += (flux_r - flux_l) / h;
                }
                out[idx] = acc;
            }
    return out;
}

VectorField face_gradient(const ScalarField& w) {
    const Grid& g = w.grid;
    VectorField out(g);
    for (int k = 0; k < g.dim; ++k) {
        auto fd = face_dims(g, k);
        const double h = g.spacing[k];
        const std::int64_t s = g.stride[k];
        std::int64_t f = 0;
        for (int j2 = 0; j2 < fd[2]; ++j2)
            for (int j1 = 0; j1 < fd[1]; ++j1)
                for (int j0 = 0; j0 < fd[0]; ++j0, ++f) {
                    const int jj[3] = {j0, j1, j2};
                    if (jj[k] == 0 || jj[k] == g.cells[k]) continue;  // boundary face stays 0
                    // face jj[k] sits between cells jj[k]-1 and jj[k] along axis k
                    std::int64_t right =
                        jj[0] * g.stride[0] + jj[1] * g.stride[1] + jj[2] * g.stride[2];
                    std::int64_t left = right - s;
                    out.face[k][static_cast<std::size_t>(f)] = (w[right] - w[left]) / h;
                }
    }
    return out;
}

ScalarField div_face_flux(const VectorField& flux) {
    const Grid& g = flux.grid;
    // boundary faces must be exactly zero
    for (int k = 0; k < g.dim; ++k) {
        auto fd = face_dims(g, k);
        std::int64_t f = 0;
        for (int j2 = 0; j2 < fd[2]; ++j2)
            for (int j1 = 0; j1 < fd[1]; ++j1)
                for (int j0 = 0; j0 < fd[0]; ++j0, ++f) {
                    const int jj[3] = {j0, j1, j2};
                    if ((jj[k] == 0 || jj[k] == g.cells[k]) &&
                        flux.face[k][static_cast<std::size_t>(f)] != 0.0)
                        throw ConfigError("div_face_flux: nonzero boundary face");
                }
    }
    ScalarField out(g);
    for (int k = 0; k < g.dim; ++k) {
        auto fd = face_dims(g, k);
        const double h = g.spacing[k];
        std::int64_t f = 0;
        for (int j2 = 0; j2 < fd[2]; ++j2)
            for (int j1 = 0; j1 < fd[1]; ++j1)
                for (int j0 = 0; j0 < fd[0]; ++j0, ++f) {
                    const int jj[3] = {j0, j1, j2};
                    const double val = flux.face[k][static_cast<std::size_t>(f)];
                    if (val == 0.0) continue;
                    std::int64_t cell = jj[0] * g.stride[0] + jj[1] * g.stride[1] +
                                        jj[2] * g.stride[2];
                    // face jj[k] is the left face of cell jj[k] and the right
                    // face of cell jj[k]-1
                    if (jj[k] < g.cells[k]) out[cell] -= val / h;
                    if (jj[k] > 0) out[cell - g.stride[k]] += val / h;
                }
    }
    return out;
}

double integrate(const ScalarField& w) {
    double s = 0.0;
    for (double v : w.values) s += v;
    return s * w.grid.cell_volume;
}

double lp_space_norm(const ScalarField& w, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : w.values) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(p >= 1.0))
        throw ConfigError("lp_space_norm: p must be >= 1 or infinity");
    double s = 0.0;
    for (double v : w.values) s += std::pow(std::abs(v), p);
    return std::pow(s * w.grid.cell_volume, 1.0 / p);
}

double bochner_norm(const std::vector<ScalarField>& series, double p_time,
                    double p_space, double dt) {
    if (series.empty())
        throw ConfigError("bochner_norm: empty snapshot sequence");
    if (!(dt > 0.0))
        throw ConfigError("bochner_norm: dt must be positive");
    if (std::isinf(p_time)) {
        double m = 0.0;
        for (const auto& w : series) m = std::max(m, lp_space_norm(w, p_space));
        return m;
    }
    if (!(p_time >= 1.0))
        throw ConfigError("bochner_norm: p_time must be >= 1 or infinity");
    double s = 0.0;
    for (const auto& w : series) s += std::pow(lp_space_norm(w, p_space), p_time) * dt;
    return std::pow(s, 1.0 / p_time);
}

double dot(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return s * a.grid.cell_volume;
}

double field_min(const ScalarField& w) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : w.values) m = std::min(m, v);
    return m;
}

double field_max(const ScalarField& w) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : w.values) m = std::max(m, v);
    return m;
}

void require_finite(const ScalarField& w, const char* what) {
    for (double v : w.values)
        if (!std::isfinite(v))
            throw SolverError(std::string("non-finite value in ") + what);
}

}  // namespace ccopt
