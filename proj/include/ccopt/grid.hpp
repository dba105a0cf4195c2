#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ccopt/errors.hpp"

namespace ccopt {

/// Uniform axis-aligned cell-centered grid in 1, 2 or 3 dimensions.
///
/// Cells are indexed lexicographically with axis 0 fastest:
///   idx = i0 + cells[0]*(i1 + cells[1]*i2).
/// Unused axes have cells = 1, extent = 1, and do not contribute to stencils.
struct Grid {
    int dim = 1;
    std::array<int, 3> cells{1, 1, 1};
    std::array<double, 3> extent{1.0, 1.0, 1.0};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    double cell_volume = 1.0;
    std::int64_t total = 1;
    std::array<std::int64_t, 3> stride{1, 1, 1};

    double min_spacing() const;
    double domain_volume() const { return extent[0] * extent[1] * extent[2]; }
};

Grid make_grid(int dim, const std::vector<int>& cells_per_axis,
               const std::vector<double>& extent_per_axis);

bool same_grid(const Grid& a, const Grid& b);

/// One real value per cell, lexicographic cell order.
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), values(static_cast<std::size_t>(g.total), fill) {}

    double& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
};

/// Face-centered values, one array per axis. The array for axis k has
/// (cells[k]+1) entries along that axis; entries on the domain boundary are
/// kept exactly zero, which encodes the no-flux boundary condition.
struct VectorField {
    Grid grid;
    std::array<std::vector<double>, 3> face;

    VectorField() = default;
    explicit VectorField(const Grid& g);
};

/// {0,1} indicator of a control subdomain; at least one cell must be active.
struct SubdomainMask {
    Grid grid;
    std::vector<double> indicator;
};

/// Mask made of all cells whose centers lie in the closed box [lo, hi].
SubdomainMask make_box_mask(const Grid& grid, const std::vector<double>& lo,
                            const std::vector<double>& hi);

/// Volume of the masked region.
double mask_volume(const SubdomainMask& mask);

// --- face indexing helpers ------------------------------------------------

/// Number of faces of the grid along the given axis.
std::int64_t face_total(const Grid& g, int axis);

/// Dimensions of the face array for the given axis (cells[axis] + 1 entries
/// along that axis).
std::array<int, 3> face_dims(const Grid& g, int axis);

// --- discrete operators ---------------------------------------------------

/// 2*dim+1 point Laplacian with mirrored ghost cells (homogeneous Neumann).
/// The cell-volume weighted sum of the output is zero to round-off.
ScalarField laplacian_neumann(const ScalarField& w);

/// Two-point face gradient: interior face between cells L,R along axis k
/// carries (w_R - w_L)/h_k; boundary faces are zero.
VectorField face_gradient(const ScalarField& w);

/// Conservative divergence of a face flux. Rejects fluxes with nonzero
/// boundary faces; the volume-weighted global sum of the output telescopes
/// to zero.
ScalarField div_face_flux(const VectorField& flux);

/// Midpoint quadrature: sum of cell values times cell volume.
double integrate(const ScalarField& w);

/// Discrete L^p spatial norm, p >= 1 or infinity.
double lp_space_norm(const ScalarField& w, double p);

/// Mixed space-time norm of a snapshot sequence: rectangle rule in time
/// (each snapshot weighted dt) over the spatial L^{p_space} norms, outer
/// exponent p_time; p_time = infinity takes the max over snapshots.
double bochner_norm(const std::vector<ScalarField>& series, double p_time,
                    double p_space, double dt);

/// Cell-volume weighted dot product.
double dot(const ScalarField& a, const ScalarField& b);

double field_min(const ScalarField& w);
double field_max(const ScalarField& w);

/// Throws SolverError if any entry is NaN or infinite.
void require_finite(const ScalarField& w, const char* what);

}  // namespace ccopt
