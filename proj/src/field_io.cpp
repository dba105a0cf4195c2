#include "ccopt/field_io.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "field dumps are little-endian; big-endian hosts are unsupported");

namespace ccopt {

namespace {
constexpr const char* kMagic = "CCOPT-FIELD 1";

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void write_field(const std::string& path, const ScalarField& field, int time_index) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    const Grid& g = field.grid;
    out << kMagic << "\n";
    out << "dim " << g.dim << "\n";
    out << "cells";
    for (int k = 0; k < g.dim; ++k) out << ' ' << g.cells[k];
    out << "\n";
    out << "spacing";
    for (int k = 0; k < g.dim; ++k) out << ' ' << format_double(g.spacing[k]);
    out << "\n";
    out << "time_index " << time_index << "\n";
    out << "data\n";
    out.write(reinterpret_cast<const char*>(field.values.data()),
              static_cast<std::streamsize>(field.values.size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + path);
}

LoadedField read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);

    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw IoError(std::string("truncated header (") + what +
                                                   "): " + path);
        return line;
    };

    if (next_line("magic") != kMagic) throw IoError("bad magic in field dump: " + path);

    int dim = 0;
    {
        std::istringstream ss(next_line("dim"));
        std::string key;
        ss >> key >> dim;
        if (key != "dim" || dim < 1 || dim > 3) throw IoError("bad dim line: " + path);
    }
    std::vector<int> cells(dim);
    {
        std::istringstream ss(next_line("cells"));
        std::string key;
        ss >> key;
        if (key != "cells") throw IoError("bad cells line: " + path);
        for (int k = 0; k < dim; ++k)
            if (!(ss >> cells[k])) throw IoError("bad cells line: " + path);
    }
    std::vector<double> spacing(dim);
    {
        std::istringstream ss(next_line("spacing"));
        std::string key;
        ss >> key;
        if (key != "spacing") throw IoError("bad spacing line: " + path);
        for (int k = 0; k < dim; ++k)
            if (!(ss >> spacing[k])) throw IoError("bad spacing line: " + path);
    }
    int time_index = 0;
    {
        std::istringstream ss(next_line("time_index"));
        std::string key;
        ss >> key >> time_index;
        if (key != "time_index") throw IoError("bad time_index line: " + path);
    }
    if (next_line("data") != "data") throw IoError("missing data marker: " + path);

    // build the grid from (cells, spacing) directly so the dumped spacing
    // round-trips bit exactly
    Grid grid;
    grid.dim = dim;
    for (int k = 0; k < dim; ++k) {
        if (cells[k] < 1 || !(spacing[k] > 0.0))
            throw IoError("bad grid geometry in field dump: " + path);
        grid.cells[k] = cells[k];
        grid.spacing[k] = spacing[k];
        grid.extent[k] = spacing[k] * cells[k];
    }
    grid.total = 1;
    for (int k = 0; k < 3; ++k) {
        grid.stride[k] = grid.total;
        grid.total *= grid.cells[k];
    }
    grid.cell_volume = 1.0;
    for (int k = 0; k < dim; ++k) grid.cell_volume *= grid.spacing[k];

    LoadedField lf;
    lf.time_index = time_index;
    lf.field = ScalarField(grid);
    in.read(reinterpret_cast<char*>(lf.field.values.data()),
            static_cast<std::streamsize>(lf.field.values.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(lf.field.values.size() * sizeof(double)))
        throw IoError("truncated field data: " + path);
    return lf;
}

ScalarField read_field_on_grid(const std::string& path, const Grid& grid) {
    LoadedField lf = read_field(path);
    const Grid& fg = lf.field.grid;
    bool ok = (fg.dim == grid.dim);
    for (int k = 0; ok && k < grid.dim; ++k)
        ok = (fg.cells[k] == grid.cells[k]) && (fg.spacing[k] == grid.spacing[k]);
    if (!ok) throw IoError("field dump grid does not match the run grid: " + path);
    // adopt the caller's grid so extents compare bitwise downstream
    lf.field.grid = grid;
    return std::move(lf.field);
}

}  // namespace ccopt
